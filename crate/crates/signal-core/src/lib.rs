//! Pure activity-metric computation for wrist accelerometer streams.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. [`compute_enmo`] — per-sample Euclidean-norm-minus-one in g units,
//!    clamped at zero.
//! 2. [`summarize_bout`] — mean ENMO over one 15-second bout window plus the
//!    binary moderate-to-vigorous (MVPA) label.
//! 3. [`detect_mvpa_epoch`] — trailing 7-minute window decision: the epoch is
//!    MVPA when at least 294 of the last 420 seconds of bouts were MVPA.
//!
//! [`MvpaStream`] glues the stages into a streaming accumulator that consumes
//! samples one at a time and emits one [`BoutOutcome`] per completed bout,
//! aligned to the session start. Everything here is deterministic and free of
//! I/O except the [`trace`] module, which reads and writes the `t,ax,ay,az`
//! trace replay format and the newline-delimited trigger report.

mod bout;
mod enmo;
mod epoch;
mod error;
mod stream;
pub mod trace;

pub use bout::{summarize_bout, BoutSummary, TriggerConfig};
pub use enmo::{compute_enmo, AccelSample, SENSOR_FULL_SCALE_G};
pub use epoch::{detect_mvpa_epoch, EpochDecision};
pub use error::SignalError;
pub use stream::{evaluate_trace, trigger_timestamps, BoutOutcome, MvpaStream};
