//! Phone-side data collection agent.
//!
//! Records are captured through typed entry points, validated, and appended
//! to a per-type per-day outbox file on disk before anything touches the
//! network — the local store is the durable source of truth. GPS positions
//! are AES-256-CBC encrypted field-level before persistence, so plaintext
//! coordinates never exist in any file or wire payload.
//!
//! Uploads are store-and-forward: batches go out with a device-scoped
//! bearer token, records are marked uploaded only on a per-record server
//! acknowledgment, transport failures back off exponentially with jitter,
//! and server-side upsert-by-id makes retransmission harmless.

mod agent;
mod canon;
mod crypto;
mod error;
mod outbox;
mod record;
mod transport;

pub use agent::{AgentConfig, ConsistencyReport, PhoneAgent, StoredToken, UploadOutcome};
pub use canon::{canonical_json, content_hash};
pub use crypto::{decrypt_gps, encrypt_gps, GpsKey};
pub use error::AgentError;
pub use outbox::Outbox;
pub use record::{DataRecord, RecordType};
pub use transport::{Transport, TransportError, WireRequest, WireResponse};
