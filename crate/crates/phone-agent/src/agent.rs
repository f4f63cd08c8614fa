use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uuid::Uuid;

use crate::canon::content_hash;
use crate::crypto::{decrypt_gps, encrypt_gps, GpsKey};
use crate::outbox::Outbox;
use crate::record::{DataRecord, RecordType};
use crate::transport::{Transport, TransportError, WireRequest};
use crate::AgentError;

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub participant_id: String,
    pub phone_id: String,
    pub gps_key: GpsKey,
    /// Agent state directory: outbox files, token, dead letters.
    pub data_dir: PathBuf,
    pub batch_size: usize,
    pub backoff_initial_s: f64,
    pub backoff_cap_s: f64,
    pub drain_pct_per_hour: f64,
    pub rng_seed: u64,
}

impl AgentConfig {
    pub fn new(participant_id: &str, phone_id: &str, gps_key: GpsKey, data_dir: PathBuf) -> Self {
        Self {
            participant_id: participant_id.to_string(),
            phone_id: phone_id.to_string(),
            gps_key,
            data_dir,
            batch_size: 500,
            backoff_initial_s: 1.0,
            backoff_cap_s: 300.0,
            drain_pct_per_hour: 3.0,
            rng_seed: 0,
        }
    }
}

/// The on-device token, persisted across restarts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredToken {
    pub token: String,
    pub device_id: String,
    pub issued_t: f64,
    pub expires_t: f64,
}

/// Result of one upload pump.
#[derive(Debug, Clone, PartialEq)]
pub enum UploadOutcome {
    /// Everything pending was acknowledged.
    Drained { acked: usize, dead_lettered: usize },
    /// The network failed part-way; retry no earlier than `retry_at`.
    Deferred {
        acked: usize,
        dead_lettered: usize,
        retry_at: f64,
    },
    /// Called inside the backoff window; nothing was attempted.
    BackedOff { retry_at: f64 },
}

impl UploadOutcome {
    pub fn acked(&self) -> usize {
        match self {
            UploadOutcome::Drained { acked, .. } | UploadOutcome::Deferred { acked, .. } => *acked,
            UploadOutcome::BackedOff { .. } => 0,
        }
    }
}

/// Differences between the local outbox and the backend's view.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub missing_on_server: Vec<String>,
    pub missing_locally: Vec<String>,
    pub mismatched: Vec<String>,
}

impl ConsistencyReport {
    pub fn is_empty(&self) -> bool {
        self.missing_on_server.is_empty()
            && self.missing_locally.is_empty()
            && self.mismatched.is_empty()
    }
}

pub struct PhoneAgent {
    cfg: AgentConfig,
    outbox: Outbox,
    token: Option<StoredToken>,
    rng: ChaCha8Rng,
    backoff_s: f64,
    next_attempt_t: f64,
    battery_pct: f64,
}

impl PhoneAgent {
    pub fn new(cfg: AgentConfig) -> Result<Self, AgentError> {
        if cfg.participant_id.is_empty() || cfg.phone_id.is_empty() {
            return Err(AgentError::NotConfigured(
                "participant_id and phone_id are required".into(),
            ));
        }
        let outbox = Outbox::open(&cfg.data_dir.join("outbox"))?;
        let token_path = cfg.data_dir.join("token.json");
        let token = match std::fs::read(&token_path) {
            Ok(bytes) => serde_json::from_slice(&bytes).ok(),
            Err(_) => None,
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            backoff_s: cfg.backoff_initial_s,
            next_attempt_t: 0.0,
            battery_pct: 100.0,
            outbox,
            token,
            cfg,
        })
    }

    pub fn participant_id(&self) -> &str {
        &self.cfg.participant_id
    }

    pub fn phone_id(&self) -> &str {
        &self.cfg.phone_id
    }

    pub fn outbox(&self) -> &Outbox {
        &self.outbox
    }

    pub fn token(&self) -> Option<&StoredToken> {
        self.token.as_ref()
    }

    pub fn battery_pct(&self) -> f64 {
        self.battery_pct
    }

    pub fn set_battery(&mut self, pct: f64) {
        self.battery_pct = pct.clamp(0.0, 100.0);
    }

    /// Linear drain while collecting; returns the new level.
    pub fn drain_battery(&mut self, elapsed_s: f64) -> f64 {
        self.battery_pct =
            (self.battery_pct - self.cfg.drain_pct_per_hour * elapsed_s / 3600.0).max(0.0);
        self.battery_pct
    }

    fn next_uuid(&mut self) -> Uuid {
        let mut bytes = [0u8; 16];
        self.rng.fill(&mut bytes);
        uuid::Builder::from_random_bytes(bytes).into_uuid()
    }

    /// The generic capture path: validates the envelope and appends to the
    /// outbox. Disk failure is fatal and surfaced, never swallowed.
    pub fn record_raw(
        &mut self,
        record_type: RecordType,
        payload: Value,
        now: f64,
    ) -> Result<DataRecord, AgentError> {
        let record = DataRecord {
            record_id: self.next_uuid(),
            record_type,
            participant_id: self.cfg.participant_id.clone(),
            phone_id: self.cfg.phone_id.clone(),
            username: self.cfg.participant_id.clone(),
            timestamp: now,
            payload,
        };
        record.validate()?;
        self.outbox.append(&record)?;
        Ok(record)
    }

    /// GPS positions pass through field-level encryption before persistence.
    pub fn record_gps(&mut self, lat: f64, lon: f64, now: f64) -> Result<DataRecord, AgentError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(AgentError::InvalidRecord(format!(
                "coordinates ({lat}, {lon}) out of range"
            )));
        }
        let mut iv = [0u8; 16];
        self.rng.fill(&mut iv);
        let payload = encrypt_gps(&self.cfg.gps_key, lat, lon, iv);
        self.record_raw(RecordType::Gps, payload, now)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record_enmo_bout(
        &mut self,
        start_t: f64,
        duration_s: f64,
        mean_enmo: f64,
        is_mvpa: bool,
        sample_count: usize,
        band_mac: &str,
        side: &str,
        now: f64,
    ) -> Result<DataRecord, AgentError> {
        let payload = json!({
            "start_t": start_t,
            "duration_s": duration_s,
            "mean_enmo": mean_enmo,
            "is_mvpa": is_mvpa,
            "sample_count": sample_count,
            "band_mac": band_mac,
            "side": side,
        });
        self.record_raw(RecordType::Enmo, payload, now)
    }

    pub fn record_battery(&mut self, pct: f64, source: &str, now: f64) -> Result<DataRecord, AgentError> {
        self.record_raw(RecordType::Battery, json!({"pct": pct, "source": source}), now)
    }

    pub fn record_event(
        &mut self,
        event_kind: &str,
        band_mac: Option<&str>,
        local_time: &str,
        now: f64,
    ) -> Result<DataRecord, AgentError> {
        let mut payload = json!({
            "event_kind": event_kind,
            "local_time": local_time,
        });
        if let Some(mac) = band_mac {
            payload
                .as_object_mut()
                .expect("object literal")
                .insert("band_mac".into(), json!(mac));
        }
        self.record_raw(RecordType::Event, payload, now)
    }

    pub fn record_survey(
        &mut self,
        survey_id: Uuid,
        kind: &str,
        triggered_t: f64,
        completed_t: f64,
        responses: &BTreeMap<String, Value>,
        now: f64,
    ) -> Result<DataRecord, AgentError> {
        let payload = json!({
            "survey_id": survey_id.to_string(),
            "kind": kind,
            "triggered_t": triggered_t,
            "completed_t": completed_t,
            "responses": responses,
        });
        self.record_raw(RecordType::Survey, payload, now)
    }

    /// Returns a valid token, signing up when none is stored or the stored
    /// one has expired. Offline failures bubble as transport errors so the
    /// agent keeps recording and retries on the next connectivity.
    pub fn authenticate(
        &mut self,
        transport: &mut dyn Transport,
        now: f64,
    ) -> Result<String, AgentError> {
        if let Some(tok) = &self.token {
            if tok.expires_t > now + 60.0 {
                return Ok(tok.token.clone());
            }
        }
        let body = serde_json::to_vec(&json!({
            "device_id": self.cfg.phone_id,
            "username": self.cfg.participant_id,
        }))
        .expect("signup body serializes");
        let resp = transport.send(&WireRequest::post("/signup", body), now)?;
        if resp.status != 200 {
            return Err(AgentError::Auth(format!("signup returned {}", resp.status)));
        }
        let parsed = resp
            .json()
            .ok_or_else(|| AgentError::BadResponse("signup body is not JSON".into()))?;
        let token = StoredToken {
            token: parsed["token"]
                .as_str()
                .ok_or_else(|| AgentError::BadResponse("signup lacks token".into()))?
                .to_string(),
            device_id: self.cfg.phone_id.clone(),
            issued_t: parsed["issued_t"].as_f64().unwrap_or(now),
            expires_t: parsed["expires_t"].as_f64().unwrap_or(now),
        };
        std::fs::write(
            self.cfg.data_dir.join("token.json"),
            serde_json::to_vec(&token).expect("token serializes"),
        )?;
        self.token = Some(token);
        Ok(self.token.as_ref().expect("just stored").token.clone())
    }

    fn defer(&mut self, now: f64, acked: usize, dead_lettered: usize) -> UploadOutcome {
        let jitter: f64 = self.rng.random_range(0.75..1.25);
        let retry_at = now + self.backoff_s * jitter;
        self.backoff_s = (self.backoff_s * 2.0).min(self.cfg.backoff_cap_s);
        self.next_attempt_t = retry_at;
        UploadOutcome::Deferred {
            acked,
            dead_lettered,
            retry_at,
        }
    }

    /// Pushes pending records in per-type batches. Safe to call any time:
    /// it is a no-op inside a backoff window and tolerates being offline.
    /// Records are marked uploaded only on a per-record acknowledgment;
    /// semantic rejections are quarantined and surfaced, never blind-retried.
    pub fn upload_pending(
        &mut self,
        transport: &mut dyn Transport,
        now: f64,
    ) -> Result<UploadOutcome, AgentError> {
        if now < self.next_attempt_t {
            return Ok(UploadOutcome::BackedOff {
                retry_at: self.next_attempt_t,
            });
        }
        let mut acked = 0usize;
        let mut dead = 0usize;
        let mut token = match self.authenticate(transport, now) {
            Ok(t) => t,
            Err(AgentError::Transport(_)) => return Ok(self.defer(now, 0, 0)),
            Err(e) => return Err(e),
        };
        for record_type in RecordType::ALL {
            loop {
                let batch: Vec<DataRecord> = self
                    .outbox
                    .pending(record_type)
                    .into_iter()
                    .take(self.cfg.batch_size)
                    .cloned()
                    .collect();
                if batch.is_empty() {
                    break;
                }
                let body = serde_json::to_vec(&json!({ "records": batch }))
                    .expect("records serialize");
                let path = format!("/data/{}", record_type.as_str());
                let mut request = WireRequest::post(&path, body);
                request.bearer = Some(token.clone());
                let resp = match transport.send(&request, now) {
                    Ok(r) => r,
                    Err(TransportError::Other(msg)) => {
                        return Err(AgentError::Transport(TransportError::Other(msg)))
                    }
                    Err(_) => return Ok(self.defer(now, acked, dead)),
                };
                match resp.status {
                    200 => {
                        let (a, d) = self.apply_acks(&batch, &resp)?;
                        acked += a;
                        dead += d;
                    }
                    401 => {
                        // One fresh signup, then retry this batch once.
                        self.token = None;
                        token = match self.authenticate(transport, now) {
                            Ok(t) => t,
                            Err(AgentError::Transport(_)) => {
                                return Ok(self.defer(now, acked, dead))
                            }
                            Err(e) => return Err(e),
                        };
                        let mut retry = request.clone();
                        retry.bearer = Some(token.clone());
                        let resp = match transport.send(&retry, now) {
                            Ok(r) => r,
                            Err(_) => return Ok(self.defer(now, acked, dead)),
                        };
                        if resp.status == 200 {
                            let (a, d) = self.apply_acks(&batch, &resp)?;
                            acked += a;
                            dead += d;
                        } else {
                            return Err(AgentError::Auth(format!(
                                "upload still rejected ({}) after re-signup",
                                resp.status
                            )));
                        }
                    }
                    other => {
                        if (500..600).contains(&other) {
                            return Ok(self.defer(now, acked, dead));
                        }
                        return Err(AgentError::BadResponse(format!(
                            "upload returned {other}"
                        )));
                    }
                }
            }
        }
        self.backoff_s = self.cfg.backoff_initial_s;
        self.next_attempt_t = now;
        Ok(UploadOutcome::Drained {
            acked,
            dead_lettered: dead,
        })
    }

    fn apply_acks(
        &mut self,
        batch: &[DataRecord],
        resp: &crate::transport::WireResponse,
    ) -> Result<(usize, usize), AgentError> {
        let parsed = resp
            .json()
            .ok_or_else(|| AgentError::BadResponse("ack body is not JSON".into()))?;
        let results = parsed["results"]
            .as_array()
            .ok_or_else(|| AgentError::BadResponse("ack body lacks `results`".into()))?;
        let mut ok_ids = Vec::new();
        let mut dead = 0usize;
        for result in results {
            let id = result["record_id"]
                .as_str()
                .and_then(|s| Uuid::parse_str(s).ok());
            let status = result["status"].as_str().unwrap_or("");
            match (id, status) {
                (Some(id), "ok") => ok_ids.push(id),
                (Some(id), reason) => {
                    let record = batch
                        .iter()
                        .find(|r| r.record_id == id)
                        .ok_or_else(|| {
                            AgentError::BadResponse(format!("ack for unknown record {id}"))
                        })?
                        .clone();
                    self.outbox.dead_letter(&record, reason)?;
                    dead += 1;
                }
                (None, reason) => {
                    return Err(AgentError::BadResponse(format!(
                        "unmatchable rejection: {reason}"
                    )))
                }
            }
        }
        self.outbox.mark_acked(&ok_ids)?;
        Ok((ok_ids.len(), dead))
    }

    /// Compares the decrypted local record set with the backend's copy by
    /// record id and content hash. Run on a quiescent system.
    pub fn verify_consistency(
        &mut self,
        transport: &mut dyn Transport,
        now: f64,
    ) -> Result<ConsistencyReport, AgentError> {
        let token = self.authenticate(transport, now)?;
        let mut request = WireRequest::get("/records");
        request
            .query
            .push(("participant_id".into(), self.cfg.participant_id.clone()));
        request.bearer = Some(token);
        let resp = transport.send(&request, now)?;
        if resp.status != 200 {
            return Err(AgentError::BadResponse(format!(
                "record query returned {}",
                resp.status
            )));
        }
        let parsed = resp
            .json()
            .ok_or_else(|| AgentError::BadResponse("query body is not JSON".into()))?;
        let mut server: BTreeMap<String, Value> = BTreeMap::new();
        for doc in parsed["records"].as_array().into_iter().flatten() {
            let Some(id) = doc.get("record_id").and_then(Value::as_str) else {
                continue;
            };
            let mut doc = doc.clone();
            if let Some(obj) = doc.as_object_mut() {
                // Server-side envelope additions are not part of the
                // client's content.
                obj.remove("received_t");
                obj.remove("device_id");
            }
            server.insert(id.to_string(), doc);
        }

        let mut report = ConsistencyReport::default();
        let mut local: BTreeMap<String, &DataRecord> = BTreeMap::new();
        for record in self.outbox.all_records() {
            local.insert(record.record_id.to_string(), record);
        }
        for (id, record) in &local {
            match server.get(id) {
                None => report.missing_on_server.push(id.clone()),
                Some(server_doc) => {
                    let local_doc =
                        serde_json::to_value(record).expect("records serialize");
                    let mut mismatch = content_hash(&local_doc) != content_hash(server_doc);
                    if record.record_type == RecordType::Gps
                        && decrypt_gps(&self.cfg.gps_key, &record.payload).is_err()
                    {
                        mismatch = true;
                    }
                    if mismatch {
                        report.mismatched.push(id.clone());
                    }
                }
            }
        }
        for id in server.keys() {
            if !local.contains_key(id) {
                report.missing_locally.push(id.clone());
            }
        }
        Ok(report)
    }
}
