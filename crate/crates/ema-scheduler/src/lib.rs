//! Ecological momentary assessment scheduling.
//!
//! Random surveys fire three times per day, one uniformly random time inside
//! each of the morning, afternoon and evening blocks of the 07:30–21:30
//! collection window. Activity surveys fire on MVPA notifications, with at
//! most one pending at a time. Every instance ends in exactly one terminal
//! state — completed, declined, or expired 30 minutes after trigger — and
//! every lifecycle transition emits one [`EventRecord`] carrying the full
//! identity/time tuple.

mod definition;
mod event;
mod scheduler;
mod window;

pub use definition::{AnswerType, Question, SurveyDefinition, DEFAULT_INSTRUMENT_TOML};
pub use event::{local_time_iso, EventKind, EventRecord};
pub use scheduler::{
    plan_random_surveys, EmaError, EmaScheduler, SchedulerCounters, SurveyAction, SurveyInstance,
    SurveyKind, SurveyStatus, SURVEY_EXPIRY_SECONDS,
};
pub use window::{CollectionWindow, DAY_SECONDS};
