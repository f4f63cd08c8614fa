use thiserror::Error;

/// Errors from sample validation, bout aggregation, and trace parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("acceleration component is not finite")]
    NonFiniteSample,
    #[error("acceleration component {value} g exceeds the ±{limit} g full-scale range")]
    FullScaleExceeded { value: f64, limit: f64 },
    #[error("bout window contains no samples")]
    EmptyBout,
    #[error("sample timestamps must be strictly increasing: got {t} after {prev}")]
    NonMonotonicTime { prev: f64, t: f64 },
    #[error("sample at t={t} precedes session start {session_start}")]
    BeforeSessionStart { t: f64, session_start: f64 },
    #[error("invalid trigger config: {0}")]
    InvalidConfig(String),
    #[error("trace parse error at line {line}: {reason}")]
    TraceParse { line: usize, reason: String },
    #[error("trace i/o error: {0}")]
    TraceIo(String),
}
