//! The simulated lossy network between phone agents and the backend.
//!
//! Inside an outage interval every request fails in the schedule's drop
//! mode; outside, requests are handed to the in-process service handler.
//! The three modes exercise genuinely different failure surfaces:
//!
//! - `RefuseConnection`: nothing reaches the server.
//! - `Timeout`: the server processes the request but the response is lost —
//!   the sharpest test of retry idempotency.
//! - `MidBodyCut`: the server receives a truncated body, which must parse
//!   atomically to nothing.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use backend_service::{HttpRequest, Service};
use phone_agent::{Transport, TransportError, WireRequest, WireResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropMode {
    RefuseConnection,
    Timeout,
    MidBodyCut,
}

/// Sorted, disjoint intervals during which the network is down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageSchedule {
    /// `[start_s, end_s)` pairs in scenario-relative seconds.
    pub intervals: Vec<(f64, f64)>,
    pub drop_mode: DropMode,
}

impl OutageSchedule {
    pub fn none() -> Self {
        Self {
            intervals: Vec::new(),
            drop_mode: DropMode::RefuseConnection,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut prev_end = f64::NEG_INFINITY;
        for (i, (start, end)) in self.intervals.iter().enumerate() {
            if !(start < end) {
                return Err(format!("outages[{i}]: start {start} must precede end {end}"));
            }
            if *start < prev_end {
                return Err(format!(
                    "outages[{i}]: overlaps or is out of order (previous end {prev_end})"
                ));
            }
            prev_end = *end;
        }
        Ok(())
    }

    pub fn is_down(&self, t: f64) -> bool {
        self.intervals.iter().any(|(s, e)| t >= *s && t < *e)
    }

    pub fn last_end(&self) -> Option<f64> {
        self.intervals.last().map(|(_, e)| *e)
    }
}

/// One captured exchange, for the wire log artifact and replay tests.
#[derive(Debug, Clone, Serialize)]
pub struct WireExchange {
    pub t: f64,
    pub method: String,
    pub path: String,
    pub outcome: String,
    pub status: Option<u16>,
    pub request_body: String,
    pub response_body: String,
}

pub type WireLog = Rc<RefCell<Vec<WireExchange>>>;

/// Per-agent handle onto the shared in-process backend.
pub struct SimulatedLink {
    service: Arc<Service>,
    schedule: OutageSchedule,
    /// Seconds added to the server's observed receive time.
    pub latency_s: f64,
    log: WireLog,
    rng: ChaCha8Rng,
}

impl SimulatedLink {
    pub fn new(
        service: Arc<Service>,
        schedule: OutageSchedule,
        log: WireLog,
        rng_seed: u64,
    ) -> Self {
        Self {
            service,
            schedule,
            latency_s: 0.02,
            log,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
        }
    }

    pub fn service(&self) -> &Arc<Service> {
        &self.service
    }

    fn forward(&self, req: &WireRequest, body: Vec<u8>, now: f64) -> WireResponse {
        let http = HttpRequest {
            method: req.method.clone(),
            path: req.path.clone(),
            query: req.query.clone(),
            bearer: req.bearer.clone(),
            body,
        };
        let resp = self.service.handle(&http, now + self.latency_s);
        WireResponse {
            status: resp.status,
            body: resp.body,
        }
    }

    fn record(&self, req: &WireRequest, now: f64, outcome: &str, resp: Option<&WireResponse>) {
        self.log.borrow_mut().push(WireExchange {
            t: now,
            method: req.method.clone(),
            path: req.path.clone(),
            outcome: outcome.to_string(),
            status: resp.map(|r| r.status),
            request_body: String::from_utf8_lossy(&req.body).into_owned(),
            response_body: resp
                .map(|r| String::from_utf8_lossy(&r.body).into_owned())
                .unwrap_or_default(),
        });
    }
}

impl Transport for SimulatedLink {
    fn send(&mut self, req: &WireRequest, now: f64) -> Result<WireResponse, TransportError> {
        if !self.schedule.is_down(now) {
            let resp = self.forward(req, req.body.clone(), now);
            self.record(req, now, "delivered", Some(&resp));
            return Ok(resp);
        }
        match self.schedule.drop_mode {
            DropMode::RefuseConnection => {
                self.record(req, now, "refused", None);
                Err(TransportError::ConnectionRefused)
            }
            DropMode::Timeout => {
                // The request makes it; the response does not.
                let resp = self.forward(req, req.body.clone(), now);
                self.record(req, now, "timeout_response_lost", Some(&resp));
                Err(TransportError::TimedOut)
            }
            DropMode::MidBodyCut => {
                if req.body.len() >= 2 {
                    let cut = self.rng.random_range(1..req.body.len());
                    let truncated = req.body[..cut].to_vec();
                    let resp = self.forward(req, truncated, now);
                    self.record(req, now, "mid_body_cut", Some(&resp));
                } else {
                    self.record(req, now, "cut_before_body", None);
                }
                Err(TransportError::ConnectionReset)
            }
        }
    }
}
