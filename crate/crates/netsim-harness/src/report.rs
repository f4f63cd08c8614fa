//! Run reports: a structured JSON summary plus a plain-text table view.
//! Reports contain no absolute paths and no wall-clock values, so a rerun
//! with the same seeds produces byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use phone_agent::ConsistencyReport;

#[derive(Debug, Clone, Default, Serialize)]
pub struct SurveyTally {
    pub random_scheduled: usize,
    pub activity_triggered: usize,
    pub completed: usize,
    pub declined: usize,
    pub expired: usize,
    pub suppressed_outside_window: u64,
    pub suppressed_already_pending: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandReport {
    pub mac: String,
    pub side: String,
    pub files: usize,
    pub bytes_written: u64,
    pub samples_ingested: u64,
    pub storage_used_pct: f64,
    pub wear: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParticipantReport {
    pub phone_id: String,
    pub records_by_type: BTreeMap<String, usize>,
    pub records_total: usize,
    pub uploads_acked: usize,
    pub dead_letters: u64,
    pub surveys: SurveyTally,
    pub mvpa_triggers: usize,
    pub battery_final_pct: f64,
    pub battery_alerts: usize,
    pub bands: Vec<BandReport>,
    pub consistency: ConsistencyReport,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ServerSummary {
    pub records_total: usize,
    pub by_type: BTreeMap<String, usize>,
    pub signups: u64,
    pub auth_failures: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LinkSummary {
    pub exchanges: usize,
    pub delivered: usize,
    pub failures_by_outcome: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub days: u32,
    pub participants: BTreeMap<String, ParticipantReport>,
    pub server: ServerSummary,
    pub link: LinkSummary,
    /// True when every participant's consistency report came back empty.
    pub consistency_clean: bool,
}

impl RunReport {
    /// Canonical serialized form: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable table view.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}  seed: {}  days: {}", self.scenario, self.seed, self.days);
        let _ = writeln!(
            out,
            "server: {} records, {} signups, consistency {}",
            self.server.records_total,
            self.server.signups,
            if self.consistency_clean { "CLEAN" } else { "DIRTY" }
        );
        let _ = writeln!(
            out,
            "link: {} exchanges ({} delivered)",
            self.link.exchanges, self.link.delivered
        );
        for (kind, n) in &self.link.failures_by_outcome {
            let _ = writeln!(out, "  {kind}: {n}");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>7} {:>7} {:>9} {:>9} {:>8} {:>8}",
            "participant", "records", "acked", "mvpa", "surveys", "completed", "battery", "clean"
        );
        for (id, p) in &self.participants {
            let surveys = p.surveys.random_scheduled + p.surveys.activity_triggered;
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>7} {:>7} {:>9} {:>9} {:>7.1}% {:>8}",
                id,
                p.records_total,
                p.uploads_acked,
                p.mvpa_triggers,
                surveys,
                p.surveys.completed,
                p.battery_final_pct,
                if p.consistency.is_empty() { "yes" } else { "NO" }
            );
        }
        for (id, p) in &self.participants {
            for band in &p.bands {
                let _ = writeln!(
                    out,
                    "band {} {} ({}): {} files, {} bytes, {} samples, storage {:.1}%",
                    id, band.side, band.mac, band.files, band.bytes_written,
                    band.samples_ingested, band.storage_used_pct
                );
            }
        }
        out
    }
}
