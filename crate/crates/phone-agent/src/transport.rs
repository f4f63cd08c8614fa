use thiserror::Error;

/// Client-side view of one backend request.
#[derive(Debug, Clone)]
pub struct WireRequest {
    pub method: String,
    pub path: String,
    pub query: Vec<(String, String)>,
    pub bearer: Option<String>,
    pub body: Vec<u8>,
}

impl WireRequest {
    pub fn post(path: &str, body: Vec<u8>) -> Self {
        Self {
            method: "POST".into(),
            path: path.into(),
            query: Vec::new(),
            bearer: None,
            body,
        }
    }

    pub fn get(path: &str) -> Self {
        Self {
            method: "GET".into(),
            path: path.into(),
            query: Vec::new(),
            bearer: None,
            body: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WireResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl WireResponse {
    pub fn json(&self) -> Option<serde_json::Value> {
        serde_json::from_slice(&self.body).ok()
    }
}

/// The three failure shapes a lossy network presents, plus a catch-all.
/// They are distinct so callers can tell refusal (nothing sent) from a
/// timeout (the request may have been processed) from a mid-stream cut.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("connection refused")]
    ConnectionRefused,
    #[error("request timed out")]
    TimedOut,
    #[error("connection reset mid-transfer")]
    ConnectionReset,
    #[error("transport failure: {0}")]
    Other(String),
}

/// Anything that can carry a request to the backend: the simulated lossy
/// link in tests and scenarios, a real HTTP client outside them.
pub trait Transport {
    fn send(&mut self, req: &WireRequest, now: f64) -> Result<WireResponse, TransportError>;
}
