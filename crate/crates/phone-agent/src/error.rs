use thiserror::Error;

use crate::transport::TransportError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent is not configured: {0}")]
    NotConfigured(String),
    #[error("record rejected before persistence: {0}")]
    InvalidRecord(String),
    #[error("outbox i/o failure: {0}")]
    Io(String),
    #[error("network unavailable: {0}")]
    Transport(#[from] TransportError),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("unexpected backend response: {0}")]
    BadResponse(String),
    #[error("payload crypto failure: {0}")]
    Crypto(String),
}

impl From<std::io::Error> for AgentError {
    fn from(e: std::io::Error) -> Self {
        AgentError::Io(e.to_string())
    }
}
