use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("collection requires a participant id")]
    MissingParticipantId,
    #[error("collection requires the device clock to be set")]
    ClockNotSet,
    #[error("device is already collecting")]
    AlreadyCollecting,
    #[error("device is not collecting")]
    NotCollecting,
    #[error("storage cannot be erased while collecting")]
    EraseWhileCollecting,
    #[error("storage error: {0}")]
    Storage(#[from] flash_ftl::FlashError),
    #[error("signal error: {0}")]
    Signal(#[from] signal_core::SignalError),
    #[error("wire message malformed: {0}")]
    Wire(String),
}
