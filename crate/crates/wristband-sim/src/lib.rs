//! Wristband device simulator.
//!
//! One [`Wristband`] owns a split-flash [`FlashImage`] for sensor storage
//! and an [`MvpaStream`] detector, and exposes the device's command surface:
//! start/stop collection, participant id, time set, and storage erase.
//! Sample ingestion encodes inertial records into pre-allocated session
//! files, runs bout/epoch detection, and emits edge-triggered MVPA epoch
//! notifications; only summaries ever cross the notification channel, never
//! raw samples.

mod band;
mod error;
pub mod wire;

pub use band::{
    BandCommand, BandConfig, BandNotification, IngestOutcome, Side, Wristband,
    PPG_BASELINE_COUNTS,
};
pub use error::BandError;
