//! Server-side record validation. Every inbound record is re-checked from
//! raw JSON regardless of what the client claims: UUID-shaped id, known
//! type, required identity fields, a numeric finite positive timestamp, and
//! a type-specific payload shape with element-level checks inside arrays.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde_json::Value;
use uuid::Uuid;

/// A record that passed validation, with the fields the service indexes on.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidRecord {
    pub record_id: Uuid,
    pub record_type: String,
    pub participant_id: String,
    pub phone_id: String,
    pub username: String,
    pub timestamp: f64,
}

fn require_str<'a>(doc: &'a Value, field: &str) -> Result<&'a str, String> {
    match doc.get(field) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s),
        Some(Value::String(_)) => Err(format!("field `{field}` must be non-empty")),
        Some(_) => Err(format!("field `{field}` must be a string")),
        None => Err(format!("field `{field}` is required")),
    }
}

fn require_finite_number(doc: &Value, field: &str) -> Result<f64, String> {
    match doc.get(field) {
        Some(Value::Number(n)) => {
            let v = n.as_f64().ok_or_else(|| format!("field `{field}` overflows"))?;
            if !v.is_finite() {
                return Err(format!("field `{field}` must be finite"));
            }
            Ok(v)
        }
        Some(_) => Err(format!(
            "field `{field}` must be a floating-point number, not a string or other type"
        )),
        None => Err(format!("field `{field}` is required")),
    }
}

fn require_bool(doc: &Value, field: &str) -> Result<bool, String> {
    match doc.get(field) {
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(format!("field `{field}` must be a boolean")),
        None => Err(format!("field `{field}` is required")),
    }
}

fn require_base64(doc: &Value, field: &str) -> Result<Vec<u8>, String> {
    let raw = require_str(doc, field)?;
    BASE64
        .decode(raw)
        .map_err(|_| format!("field `{field}` must be base64"))
}

/// A survey answer may be a scalar or an array of scalars; anything else
/// (nested arrays, objects, nulls) is rejected element by element.
fn check_answer_value(key: &str, value: &Value) -> Result<(), String> {
    let scalar_ok = |v: &Value| matches!(v, Value::String(_) | Value::Number(_) | Value::Bool(_));
    match value {
        v if scalar_ok(v) => Ok(()),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                if !scalar_ok(item) {
                    return Err(format!(
                        "response `{key}`[{i}] must be a string, number, or boolean"
                    ));
                }
            }
            Ok(())
        }
        _ => Err(format!(
            "response `{key}` must be a scalar or an array of scalars"
        )),
    }
}

fn check_payload(record_type: &str, payload: &Value) -> Result<(), String> {
    if !payload.is_object() {
        return Err("field `payload` must be an object".into());
    }
    match record_type {
        "gps" => {
            let iv = require_base64(payload, "iv")?;
            if iv.len() != 16 {
                return Err("field `iv` must decode to 16 bytes".into());
            }
            let ct = require_base64(payload, "ciphertext")?;
            if ct.is_empty() || ct.len() % 16 != 0 {
                return Err("field `ciphertext` must be non-empty AES blocks".into());
            }
            require_str(payload, "key_id")?;
            Ok(())
        }
        "enmo" => {
            require_finite_number(payload, "start_t")?;
            let mean = require_finite_number(payload, "mean_enmo")?;
            if mean < 0.0 {
                return Err("field `mean_enmo` must be non-negative".into());
            }
            require_bool(payload, "is_mvpa")?;
            match payload.get("sample_count") {
                Some(Value::Number(n)) if n.is_u64() => {}
                _ => return Err("field `sample_count` must be a non-negative integer".into()),
            }
            Ok(())
        }
        "survey" => {
            let raw = require_str(payload, "survey_id")?;
            Uuid::parse_str(raw).map_err(|_| "field `survey_id` must be a UUID".to_string())?;
            let kind = require_str(payload, "kind")?;
            if kind != "random" && kind != "activity" {
                return Err("field `kind` must be `random` or `activity`".into());
            }
            match payload.get("responses") {
                Some(Value::Object(map)) => {
                    for (k, v) in map {
                        check_answer_value(k, v)?;
                    }
                    Ok(())
                }
                Some(_) => Err("field `responses` must be an object".into()),
                None => Err("field `responses` is required".into()),
            }
        }
        "battery" => {
            let pct = require_finite_number(payload, "pct")?;
            if !(0.0..=100.0).contains(&pct) {
                return Err("field `pct` must be within 0..=100".into());
            }
            Ok(())
        }
        "event" => {
            require_str(payload, "event_kind")?;
            require_str(payload, "local_time")?;
            if let Some(mac) = payload.get("band_mac") {
                if !mac.is_string() {
                    return Err("field `band_mac` must be a string when present".into());
                }
            }
            Ok(())
        }
        other => Err(format!("unknown record type `{other}`")),
    }
}

/// Validates one inbound record document against the envelope and payload
/// schema. `expected_type` pins the record to the route it arrived on.
pub fn validate_record(doc: &Value, expected_type: &str) -> Result<ValidRecord, String> {
    if !doc.is_object() {
        return Err("record must be an object".into());
    }
    let raw_id = require_str(doc, "record_id")?;
    let record_id =
        Uuid::parse_str(raw_id).map_err(|_| "field `record_id` must be a UUID".to_string())?;
    let record_type = require_str(doc, "record_type")?;
    if record_type != expected_type {
        return Err(format!(
            "record_type `{record_type}` does not match route `{expected_type}`"
        ));
    }
    let participant_id = require_str(doc, "participant_id")?;
    let phone_id = require_str(doc, "phone_id")?;
    let username = require_str(doc, "username")?;
    let timestamp = require_finite_number(doc, "timestamp")?;
    if timestamp <= 0.0 {
        return Err("field `timestamp` must be positive".into());
    }
    let payload = doc
        .get("payload")
        .ok_or_else(|| "field `payload` is required".to_string())?;
    check_payload(record_type, payload)?;
    Ok(ValidRecord {
        record_id,
        record_type: record_type.to_string(),
        participant_id: participant_id.to_string(),
        phone_id: phone_id.to_string(),
        username: username.to_string(),
        timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn valid_battery() -> Value {
        json!({
            "record_id": "7f8a1c1e-26b1-4a6f-9c2e-5d3f00aa1234",
            "record_type": "battery",
            "participant_id": "p001",
            "phone_id": "phone-1",
            "username": "p001",
            "timestamp": 1_767_598_200.5,
            "payload": {"pct": 58.0, "source": "phone"}
        })
    }

    #[test]
    fn valid_record_passes() {
        let v = validate_record(&valid_battery(), "battery").unwrap();
        assert_eq!(v.participant_id, "p001");
        assert_eq!(v.timestamp, 1_767_598_200.5);
    }

    #[test]
    fn string_timestamp_is_rejected() {
        let mut doc = valid_battery();
        doc["timestamp"] = json!("2024-01-01");
        let err = validate_record(&doc, "battery").unwrap_err();
        assert!(err.contains("timestamp"), "{err}");
    }

    #[test]
    fn missing_identity_fields_are_rejected() {
        for field in ["phone_id", "username", "participant_id"] {
            let mut doc = valid_battery();
            doc.as_object_mut().unwrap().remove(field);
            let err = validate_record(&doc, "battery").unwrap_err();
            assert!(err.contains(field), "{err}");
        }
    }

    #[test]
    fn non_uuid_record_id_is_rejected() {
        let mut doc = valid_battery();
        doc["record_id"] = json!("not-a-uuid");
        assert!(validate_record(&doc, "battery").is_err());
    }

    #[test]
    fn type_route_mismatch_is_rejected() {
        let err = validate_record(&valid_battery(), "gps").unwrap_err();
        assert!(err.contains("does not match route"));
    }

    #[test]
    fn survey_array_answers_are_element_checked() {
        let mut doc = valid_battery();
        doc["record_type"] = json!("survey");
        doc["payload"] = json!({
            "survey_id": "7f8a1c1e-26b1-4a6f-9c2e-5d3f00aa9999",
            "kind": "random",
            "responses": {"symptoms": ["headache", "fatigue"], "mood": 4}
        });
        validate_record(&doc, "survey").unwrap();
        doc["payload"]["responses"]["symptoms"] = json!([["nested"]]);
        let err = validate_record(&doc, "survey").unwrap_err();
        assert!(err.contains("symptoms"), "{err}");
    }

    #[test]
    fn gps_payload_must_be_well_formed_ciphertext() {
        let mut doc = valid_battery();
        doc["record_type"] = json!("gps");
        doc["payload"] = json!({
            "iv": BASE64.encode([0u8; 16]),
            "ciphertext": BASE64.encode([1u8; 32]),
            "key_id": "k1"
        });
        validate_record(&doc, "gps").unwrap();
        doc["payload"]["iv"] = json!("short");
        assert!(validate_record(&doc, "gps").is_err());
    }
}
