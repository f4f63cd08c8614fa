//! Real-socket HTTP/1.1 adapter over the transport-independent handler.
//! This is the only place the service touches the wall clock; inside the
//! simulator the handler is always called directly with virtual time.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::{HttpRequest, HttpResponse, Service};

fn percent_decode(raw: &str) -> String {
    let bytes = raw.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("");
                if let Ok(v) = u8::from_str_radix(hex, 16) {
                    out.push(v);
                    i += 3;
                    continue;
                }
                out.push(b'%');
                i += 1;
            }
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn parse_query(raw: &str) -> Vec<(String, String)> {
    raw.split('&')
        .filter(|p| !p.is_empty())
        .map(|pair| match pair.split_once('=') {
            Some((k, v)) => (percent_decode(k), percent_decode(v)),
            None => (percent_decode(pair), String::new()),
        })
        .collect()
}

fn to_request(req: &mut tiny_http::Request) -> HttpRequest {
    let url = req.url().to_string();
    let (path, query) = match url.split_once('?') {
        Some((p, q)) => (p.to_string(), parse_query(q)),
        None => (url, Vec::new()),
    };
    let bearer = req
        .headers()
        .iter()
        .find(|h| h.field.equiv("Authorization"))
        .map(|h| h.value.as_str().to_string())
        .and_then(|v| v.strip_prefix("Bearer ").map(str::to_string));
    let mut body = Vec::new();
    let _ = req.as_reader().read_to_end(&mut body);
    HttpRequest {
        method: req.method().as_str().to_string(),
        path,
        query,
        bearer,
        body,
    }
}

fn respond(req: tiny_http::Request, resp: HttpResponse) {
    let header = tiny_http::Header::from_bytes(b"Content-Type", b"application/json")
        .expect("static header");
    let response = tiny_http::Response::from_data(resp.body)
        .with_status_code(resp.status)
        .with_header(header);
    let _ = req.respond(response);
}

fn wall_clock_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// A bound listener dispatching requests to the service handler.
pub struct HttpServer {
    inner: tiny_http::Server,
    service: Arc<Service>,
    stop: Arc<AtomicBool>,
}

impl HttpServer {
    pub fn bind(service: Arc<Service>, addr: &str) -> Result<Self, String> {
        let inner = tiny_http::Server::http(addr).map_err(|e| e.to_string())?;
        Ok(Self {
            inner,
            service,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> String {
        self.inner.server_addr().to_string()
    }

    /// A flag that makes `run` return soon after being set.
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }

    /// Serves until the stop flag is set.
    pub fn run(&self) {
        while !self.stop.load(Ordering::Relaxed) {
            match self.inner.recv_timeout(Duration::from_millis(100)) {
                Ok(Some(mut req)) => {
                    let parsed = to_request(&mut req);
                    let resp = self.service.handle(&parsed, wall_clock_now());
                    respond(req, resp);
                }
                Ok(None) => {}
                Err(_) => break,
            }
        }
    }
}
