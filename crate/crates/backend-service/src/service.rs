use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::jwt::{issue_token, validate_token, TokenClaims};
use crate::store::{DocumentStore, MemoryStore};
use crate::validate::validate_record;

/// The record collections the service accepts.
pub const RECORD_TYPES: [&str; 5] = ["gps", "enmo", "survey", "battery", "event"];

const DEVICES_COLLECTION: &str = "devices";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub token_secret: Vec<u8>,
    /// Token lifetime in seconds; 30 days by default.
    pub token_ttl_seconds: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            token_secret: b"change-me-backend-secret".to_vec(),
            token_ttl_seconds: 30.0 * 24.0 * 3600.0,
        }
    }
}

/// Transport-independent request form. The body is raw bytes so a lossy
/// transport can hand over a truncated payload and the handler sees exactly
/// what arrived.
#[derive(Debug, Clone)]
pub struct HttpRequest {
    pub method: String,
    pub path: String,
    pub query: Vec<(String, String)>,
    pub bearer: Option<String>,
    pub body: Vec<u8>,
}

impl HttpRequest {
    pub fn get(path: &str) -> Self {
        Self {
            method: "GET".into(),
            path: path.into(),
            query: Vec::new(),
            bearer: None,
            body: Vec::new(),
        }
    }

    pub fn post(path: &str, body: Vec<u8>) -> Self {
        Self {
            method: "POST".into(),
            path: path.into(),
            query: Vec::new(),
            bearer: None,
            body,
        }
    }

    pub fn with_bearer(mut self, token: &str) -> Self {
        self.bearer = Some(token.to_string());
        self
    }

    pub fn with_query(mut self, key: &str, value: &str) -> Self {
        self.query.push((key.into(), value.into()));
        self
    }

    fn query_param(&self, key: &str) -> Option<&str> {
        self.query
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn json(status: u16, value: &Value) -> Self {
        Self {
            status,
            body: serde_json::to_vec(value).expect("response serializes"),
        }
    }

    pub fn empty(status: u16) -> Self {
        Self {
            status,
            body: Vec::new(),
        }
    }

    pub fn json_body(&self) -> Option<Value> {
        serde_json::from_slice(&self.body).ok()
    }
}

#[derive(Debug, Default)]
pub struct ServiceMetrics {
    pub signups: AtomicU64,
    pub ingest_requests: AtomicU64,
    pub records_accepted: AtomicU64,
    pub records_rejected: AtomicU64,
    pub auth_failures: AtomicU64,
}

/// The ingestion service. `handle` is pure request→response given the
/// injected `now`; state lives in the document store behind its own lock,
/// so concurrent calls are safe.
pub struct Service {
    cfg: ServiceConfig,
    store: Arc<dyn DocumentStore>,
    metrics: ServiceMetrics,
}

impl Service {
    pub fn new(cfg: ServiceConfig) -> Self {
        Self::with_store(cfg, Arc::new(MemoryStore::new()))
    }

    pub fn with_store(cfg: ServiceConfig, store: Arc<dyn DocumentStore>) -> Self {
        Self {
            cfg,
            store,
            metrics: ServiceMetrics::default(),
        }
    }

    pub fn store(&self) -> &Arc<dyn DocumentStore> {
        &self.store
    }

    pub fn metrics(&self) -> &ServiceMetrics {
        &self.metrics
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    /// Total persisted data records (device accounts excluded).
    pub fn record_count(&self) -> usize {
        RECORD_TYPES.iter().map(|t| self.store.count(t)).sum()
    }

    pub fn handle(&self, req: &HttpRequest, now: f64) -> HttpResponse {
        let segments: Vec<&str> = req.path.trim_matches('/').split('/').collect();
        match (req.method.as_str(), segments.as_slice()) {
            ("POST", ["signup"]) => self.signup(req, now),
            ("POST", ["data", record_type]) => self.ingest(req, record_type, now),
            ("GET", ["records"]) => self.query(req, now),
            ("GET", ["health"]) => {
                HttpResponse::json(200, &json!({ "records": self.record_count() }))
            }
            _ => HttpResponse::json(404, &json!({"error": "no such route"})),
        }
    }

    fn authorize(&self, req: &HttpRequest, now: f64) -> Result<TokenClaims, HttpResponse> {
        let token = match &req.bearer {
            Some(t) => t,
            None => {
                self.metrics.auth_failures.fetch_add(1, Ordering::Relaxed);
                return Err(HttpResponse::empty(401));
            }
        };
        match validate_token(&self.cfg.token_secret, token, now) {
            Ok(claims) => Ok(claims),
            Err(_) => {
                self.metrics.auth_failures.fetch_add(1, Ordering::Relaxed);
                Err(HttpResponse::empty(401))
            }
        }
    }

    /// Registers (or re-finds) a device account and issues a fresh token.
    fn signup(&self, req: &HttpRequest, now: f64) -> HttpResponse {
        let body: Value = match serde_json::from_slice(&req.body) {
            Ok(v) => v,
            Err(_) => return HttpResponse::json(400, &json!({"error": "body is not valid JSON"})),
        };
        let device_id = body.get("device_id").and_then(Value::as_str).unwrap_or("");
        let username = body.get("username").and_then(Value::as_str).unwrap_or("");
        if device_id.is_empty() || username.is_empty() {
            return HttpResponse::json(
                400,
                &json!({"error": "device_id and username are required"}),
            );
        }
        if self.store.get(DEVICES_COLLECTION, device_id).is_none() {
            self.store.upsert(
                DEVICES_COLLECTION,
                device_id,
                json!({
                    "device_id": device_id,
                    "username": username,
                    "created_t": now,
                }),
            );
        }
        self.metrics.signups.fetch_add(1, Ordering::Relaxed);
        let token = issue_token(&self.cfg.token_secret, device_id, now, self.cfg.token_ttl_seconds);
        HttpResponse::json(
            200,
            &json!({
                "token": token,
                "device_id": device_id,
                "issued_t": now.floor(),
                "expires_t": (now + self.cfg.token_ttl_seconds).floor(),
            }),
        )
    }

    /// Batch ingest: the body must parse as a whole (a cut-off body persists
    /// nothing), then each record is validated and upserted independently.
    fn ingest(&self, req: &HttpRequest, record_type: &str, now: f64) -> HttpResponse {
        let claims = match self.authorize(req, now) {
            Ok(c) => c,
            Err(resp) => return resp,
        };
        if !RECORD_TYPES.contains(&record_type) {
            return HttpResponse::json(
                404,
                &json!({"error": format!("unknown record type `{record_type}`")}),
            );
        }
        self.metrics.ingest_requests.fetch_add(1, Ordering::Relaxed);
        let body: Value = match serde_json::from_slice(&req.body) {
            Ok(v) => v,
            Err(_) => return HttpResponse::json(400, &json!({"error": "body is not valid JSON"})),
        };
        let records = match body.get("records").and_then(Value::as_array) {
            Some(r) => r,
            None => {
                return HttpResponse::json(400, &json!({"error": "body needs a `records` array"}))
            }
        };
        let mut results = Vec::with_capacity(records.len());
        for doc in records {
            let raw_id = doc.get("record_id").and_then(Value::as_str).map(str::to_string);
            match validate_record(doc, record_type) {
                Ok(valid) => {
                    let mut stored = doc.clone();
                    let obj = stored.as_object_mut().expect("validated records are objects");
                    obj.insert("received_t".into(), json!(now));
                    obj.insert("device_id".into(), json!(claims.device_id));
                    self.store
                        .upsert(&valid.record_type, &valid.record_id.to_string(), stored);
                    self.metrics.records_accepted.fetch_add(1, Ordering::Relaxed);
                    results.push(json!({
                        "record_id": valid.record_id.to_string(),
                        "status": "ok",
                    }));
                }
                Err(reason) => {
                    self.metrics.records_rejected.fetch_add(1, Ordering::Relaxed);
                    results.push(json!({
                        "record_id": raw_id,
                        "status": format!("rejected: {reason}"),
                    }));
                }
            }
        }
        HttpResponse::json(200, &json!({ "results": results }))
    }

    /// Filtered query over stored records, stably ordered by
    /// (timestamp, record_id).
    fn query(&self, req: &HttpRequest, now: f64) -> HttpResponse {
        if let Err(resp) = self.authorize(req, now) {
            return resp;
        }
        let type_filter = req.query_param("record_type").map(str::to_string);
        let participant_filter = req.query_param("participant_id").map(str::to_string);
        let t_min = req.query_param("t_min").and_then(|v| v.parse::<f64>().ok());
        let t_max = req.query_param("t_max").and_then(|v| v.parse::<f64>().ok());

        let collections: Vec<&str> = match &type_filter {
            Some(t) => RECORD_TYPES.iter().filter(|&&rt| rt == t).copied().collect(),
            None => RECORD_TYPES.to_vec(),
        };
        let mut hits: Vec<(f64, String, Value)> = Vec::new();
        for collection in collections {
            self.store.for_each(collection, &mut |id, doc| {
                if let Some(p) = &participant_filter {
                    if doc.get("participant_id").and_then(Value::as_str) != Some(p) {
                        return;
                    }
                }
                let ts = doc.get("timestamp").and_then(Value::as_f64).unwrap_or(0.0);
                if let Some(min) = t_min {
                    if ts < min {
                        return;
                    }
                }
                if let Some(max) = t_max {
                    if ts > max {
                        return;
                    }
                }
                hits.push((ts, id.to_string(), doc.clone()));
            });
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let records: Vec<Value> = hits.into_iter().map(|(_, _, doc)| doc).collect();
        HttpResponse::json(200, &json!({ "records": records }))
    }
}
