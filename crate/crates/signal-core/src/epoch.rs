use crate::{BoutSummary, TriggerConfig};

/// Outcome of evaluating one trailing epoch window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochDecision {
    /// True when the MVPA-seconds in the window meet the requirement.
    pub is_mvpa_epoch: bool,
    /// False when fewer bouts than a full window were available; such
    /// windows never trigger.
    pub window_complete: bool,
}

/// Decides whether the trailing epoch window is MVPA.
///
/// `recent_bouts` are the consecutive bouts covering the trailing window,
/// oldest first; only the last `bouts_per_epoch` entries are considered. A
/// window with fewer bouts than that is incomplete and yields `false`.
pub fn detect_mvpa_epoch(recent_bouts: &[BoutSummary], cfg: &TriggerConfig) -> EpochDecision {
    let need = cfg.bouts_per_epoch();
    if recent_bouts.len() < need {
        return EpochDecision {
            is_mvpa_epoch: false,
            window_complete: false,
        };
    }
    let window = &recent_bouts[recent_bouts.len() - need..];
    let mvpa_seconds: u32 =
        window.iter().filter(|b| b.is_mvpa).count() as u32 * cfg.bout_seconds;
    EpochDecision {
        is_mvpa_epoch: mvpa_seconds >= cfg.mvpa_required_seconds,
        window_complete: true,
    }
}
