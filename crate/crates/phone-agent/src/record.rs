use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

use crate::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordType {
    Gps,
    Enmo,
    Survey,
    Battery,
    Event,
}

impl RecordType {
    pub const ALL: [RecordType; 5] = [
        RecordType::Gps,
        RecordType::Enmo,
        RecordType::Survey,
        RecordType::Battery,
        RecordType::Event,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RecordType::Gps => "gps",
            RecordType::Enmo => "enmo",
            RecordType::Survey => "survey",
            RecordType::Battery => "battery",
            RecordType::Event => "event",
        }
    }
}

/// The universal envelope persisted locally and uploaded verbatim. Field
/// order here is the documented outbox line layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRecord {
    pub record_id: Uuid,
    pub record_type: RecordType,
    pub participant_id: String,
    pub phone_id: String,
    pub username: String,
    pub timestamp: f64,
    pub payload: Value,
}

impl DataRecord {
    /// Envelope guard applied before anything is persisted.
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.participant_id.is_empty() || self.phone_id.is_empty() || self.username.is_empty()
        {
            return Err(AgentError::InvalidRecord(
                "identity fields must be non-empty".into(),
            ));
        }
        if !self.timestamp.is_finite() || self.timestamp <= 0.0 {
            return Err(AgentError::InvalidRecord(format!(
                "timestamp {} must be a finite positive UNIX time",
                self.timestamp
            )));
        }
        if !self.payload.is_object() {
            return Err(AgentError::InvalidRecord("payload must be an object".into()));
        }
        Ok(())
    }
}
