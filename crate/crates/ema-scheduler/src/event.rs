use chrono::DateTime;
use serde::{Deserialize, Serialize};

/// Application and lifecycle events worth persisting for compliance review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    BluetoothOn,
    BluetoothOff,
    BandConnected,
    BandDisconnected,
    CollectionEnabled,
    CollectionDisabled,
    BatteryBelow20,
    SurveyTriggered,
    SurveyNotified,
    SurveyDeclined,
    SurveyExpired,
    SurveyCompleted,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::BluetoothOn => "bluetooth_on",
            EventKind::BluetoothOff => "bluetooth_off",
            EventKind::BandConnected => "band_connected",
            EventKind::BandDisconnected => "band_disconnected",
            EventKind::CollectionEnabled => "collection_enabled",
            EventKind::CollectionDisabled => "collection_disabled",
            EventKind::BatteryBelow20 => "battery_below_20",
            EventKind::SurveyTriggered => "survey_triggered",
            EventKind::SurveyNotified => "survey_notified",
            EventKind::SurveyDeclined => "survey_declined",
            EventKind::SurveyExpired => "survey_expired",
            EventKind::SurveyCompleted => "survey_completed",
        }
    }
}

/// One log line. Every record carries the identity/time tuple; the band MAC
/// is present where a wristband was involved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_kind: EventKind,
    pub participant_id: String,
    pub phone_id: String,
    pub timestamp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_mac: Option<String>,
    pub local_time: String,
}

impl EventRecord {
    pub fn new(
        event_kind: EventKind,
        participant_id: &str,
        phone_id: &str,
        timestamp: f64,
        band_mac: Option<String>,
    ) -> Self {
        Self {
            event_kind,
            participant_id: participant_id.to_string(),
            phone_id: phone_id.to_string(),
            timestamp,
            band_mac,
            local_time: local_time_iso(timestamp),
        }
    }
}

/// Renders a UNIX timestamp as an ISO-8601 local-time string. The study
/// site clock is modeled as UTC, so the rendering is purely arithmetic.
pub fn local_time_iso(timestamp: f64) -> String {
    let secs = timestamp.floor() as i64;
    let nanos = ((timestamp - secs as f64) * 1e9).round() as u32;
    match DateTime::from_timestamp(secs, nanos.min(999_999_999)) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%S").to_string(),
        None => format!("invalid({timestamp})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_kinds_use_snake_case_names() {
        assert_eq!(EventKind::BatteryBelow20.as_str(), "battery_below_20");
        let json = serde_json::to_string(&EventKind::SurveyExpired).unwrap();
        assert_eq!(json, "\"survey_expired\"");
    }

    #[test]
    fn records_carry_all_identity_fields() {
        let e = EventRecord::new(
            EventKind::BandConnected,
            "p001",
            "phone-1",
            1_767_598_200.0,
            Some("AA:BB:CC:00:00:01".into()),
        );
        assert_eq!(e.local_time, "2026-01-05T07:30:00");
        let json = serde_json::to_value(&e).unwrap();
        for field in ["event_kind", "participant_id", "phone_id", "timestamp", "band_mac", "local_time"] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
    }

    #[test]
    fn mac_is_omitted_when_inapplicable() {
        let e = EventRecord::new(EventKind::BluetoothOn, "p", "ph", 0.0, None);
        let json = serde_json::to_value(&e).unwrap();
        assert!(json.get("band_mac").is_none());
    }
}
