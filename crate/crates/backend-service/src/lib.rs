//! Ingestion backend for the study data pipeline.
//!
//! The service core is transport-independent: [`Service::handle`] maps an
//! [`HttpRequest`] to an [`HttpResponse`] deterministically, with the
//! current time injected by the caller. A thin [`http`] adapter binds the
//! same handler to a real TCP listener for out-of-simulation use.
//!
//! Routes:
//! - `POST /signup` — register a device, get a signed bearer token
//! - `POST /data/<type>` — authenticated batch ingest with per-record acks
//! - `GET /records` — authenticated filtered query
//! - `GET /health` — unauthenticated record count
//!
//! Every protected route answers 401 with an empty body to requests whose
//! token is absent, malformed, tampered, or expired. Records are upserted
//! by their client-generated UUID, which makes retransmission harmless.

pub mod http;
mod jwt;
mod service;
mod store;
mod validate;

pub use jwt::{issue_token, validate_token, AuthFailure, TokenClaims};
pub use service::{
    HttpRequest, HttpResponse, Service, ServiceConfig, ServiceMetrics, RECORD_TYPES,
};
pub use store::{DocumentStore, MemoryStore, UpsertOutcome};
pub use validate::{validate_record, ValidRecord};
