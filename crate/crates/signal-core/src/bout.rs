use crate::{compute_enmo, AccelSample, SignalError};

/// Thresholds and cadences for bout and epoch classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerConfig {
    /// A bout is MVPA when its mean ENMO strictly exceeds this, in g.
    pub mvpa_threshold_g: f64,
    /// Bout (averaging interval) length in seconds.
    pub bout_seconds: u32,
    /// Trailing decision window in seconds. Must be a multiple of
    /// `bout_seconds`.
    pub epoch_seconds: u32,
    /// MVPA-seconds required inside the trailing window to declare the epoch
    /// MVPA.
    pub mvpa_required_seconds: u32,
    /// Nominal accelerometer sampling rate in Hz.
    pub sample_rate_hz: u32,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self {
            mvpa_threshold_g: 0.1006,
            bout_seconds: 15,
            epoch_seconds: 420,
            mvpa_required_seconds: 294,
            sample_rate_hz: 32,
        }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !self.mvpa_threshold_g.is_finite() || self.mvpa_threshold_g < 0.0 {
            return Err(SignalError::InvalidConfig(
                "mvpa_threshold_g must be finite and non-negative".into(),
            ));
        }
        if self.bout_seconds == 0 || self.epoch_seconds == 0 || self.sample_rate_hz == 0 {
            return Err(SignalError::InvalidConfig(
                "bout_seconds, epoch_seconds and sample_rate_hz must be positive".into(),
            ));
        }
        if self.epoch_seconds % self.bout_seconds != 0 {
            return Err(SignalError::InvalidConfig(format!(
                "epoch_seconds ({}) must be a multiple of bout_seconds ({})",
                self.epoch_seconds, self.bout_seconds
            )));
        }
        if self.mvpa_required_seconds > self.epoch_seconds {
            return Err(SignalError::InvalidConfig(format!(
                "mvpa_required_seconds ({}) must not exceed epoch_seconds ({})",
                self.mvpa_required_seconds, self.epoch_seconds
            )));
        }
        Ok(())
    }

    /// Number of bouts covering one epoch window (28 at defaults).
    pub fn bouts_per_epoch(&self) -> usize {
        (self.epoch_seconds / self.bout_seconds) as usize
    }

    /// Nominal sample count for a full bout (480 at defaults).
    pub fn samples_per_bout(&self) -> usize {
        (self.sample_rate_hz * self.bout_seconds) as usize
    }
}

/// Aggregate of one bout window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoutSummary {
    /// Window start in seconds since epoch.
    pub start_t: f64,
    /// Window length in seconds (the configured bout length).
    pub duration_s: f64,
    /// Arithmetic mean of per-sample ENMO over the samples present.
    pub mean_enmo: f64,
    /// Whether this bout counts toward MVPA. Strict comparison against the
    /// threshold; forced false when coverage was too low.
    pub is_mvpa: bool,
    pub sample_count: usize,
    /// Set when fewer than half of the nominal samples were present. Such
    /// bouts never count as MVPA.
    pub low_coverage: bool,
}

/// Summarizes the samples of one boundary-aligned bout window.
///
/// The mean is over samples actually present. A window with fewer than half
/// of the nominal samples is flagged `low_coverage` and never classified
/// MVPA. An empty window is an error rather than a silent zero.
pub fn summarize_bout(
    samples: &[AccelSample],
    cfg: &TriggerConfig,
) -> Result<BoutSummary, SignalError> {
    let first = samples.first().ok_or(SignalError::EmptyBout)?;
    let mut sum = 0.0;
    for s in samples {
        sum += compute_enmo(s)?;
    }
    Ok(finish_bout(
        first.t,
        sum,
        samples.len(),
        cfg,
    ))
}

/// Builds a `BoutSummary` from an accumulated ENMO sum. Shared by
/// [`summarize_bout`] and the streaming path so both classify identically.
pub(crate) fn finish_bout(
    start_t: f64,
    enmo_sum: f64,
    sample_count: usize,
    cfg: &TriggerConfig,
) -> BoutSummary {
    let mean_enmo = if sample_count == 0 {
        0.0
    } else {
        enmo_sum / sample_count as f64
    };
    let low_coverage = sample_count * 2 < cfg.samples_per_bout();
    BoutSummary {
        start_t,
        duration_s: cfg.bout_seconds as f64,
        mean_enmo,
        is_mvpa: !low_coverage && mean_enmo > cfg.mvpa_threshold_g,
        sample_count,
        low_coverage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_bout(az: f64, n: usize) -> Vec<AccelSample> {
        (0..n)
            .map(|i| AccelSample::new(i as f64 / 32.0, 0.0, 0.0, az))
            .collect()
    }

    #[test]
    fn vigorous_constant_bout_is_mvpa() {
        // Every sample's ENMO is 0.15 by the norm-minus-one formula, and
        // 0.15 > 0.1006.
        let cfg = TriggerConfig::default();
        let b = summarize_bout(&constant_bout(1.15, 480), &cfg).unwrap();
        assert!((b.mean_enmo - 0.15).abs() < 1e-12);
        assert!(b.is_mvpa);
        assert_eq!(b.sample_count, 480);
        assert!(!b.low_coverage);
    }

    #[test]
    fn stationary_bout_is_not_mvpa() {
        let cfg = TriggerConfig::default();
        let b = summarize_bout(&constant_bout(1.0, 480), &cfg).unwrap();
        assert_eq!(b.mean_enmo, 0.0);
        assert!(!b.is_mvpa);
    }

    #[test]
    fn mean_exactly_at_threshold_is_not_mvpa() {
        // Exact-equality boundary: pin the threshold to the mean the samples
        // actually produce so the strict comparison is what decides.
        let cfg = TriggerConfig::default();
        let b = summarize_bout(&constant_bout(1.1006, 480), &cfg).unwrap();
        assert!((b.mean_enmo - 0.1006).abs() < 1e-12);
        let pinned = TriggerConfig {
            mvpa_threshold_g: b.mean_enmo,
            ..cfg
        };
        let b2 = summarize_bout(&constant_bout(1.1006, 480), &pinned).unwrap();
        assert_eq!(b2.mean_enmo, pinned.mvpa_threshold_g);
        assert!(!b2.is_mvpa, "strict comparison must exclude the boundary");
    }

    #[test]
    fn empty_window_is_an_error() {
        let cfg = TriggerConfig::default();
        assert_eq!(summarize_bout(&[], &cfg).unwrap_err(), SignalError::EmptyBout);
    }

    #[test]
    fn sparse_bout_is_flagged_and_never_mvpa() {
        let cfg = TriggerConfig::default();
        // 239 of 480 nominal samples: below the 50% coverage floor.
        let b = summarize_bout(&constant_bout(1.5, 239), &cfg).unwrap();
        assert!(b.low_coverage);
        assert!(!b.is_mvpa);
        // 240 of 480 is exactly half: acceptable.
        let b = summarize_bout(&constant_bout(1.5, 240), &cfg).unwrap();
        assert!(!b.low_coverage);
        assert!(b.is_mvpa);
    }

    #[test]
    fn config_validation_catches_bad_ratios() {
        let mut cfg = TriggerConfig::default();
        cfg.epoch_seconds = 100; // not a multiple of 15
        assert!(cfg.validate().is_err());
        let mut cfg = TriggerConfig::default();
        cfg.mvpa_required_seconds = 421;
        assert!(cfg.validate().is_err());
        assert!(TriggerConfig::default().validate().is_ok());
    }
}
