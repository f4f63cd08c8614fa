use std::collections::VecDeque;

use crate::bout::finish_bout;
use crate::{compute_enmo, detect_mvpa_epoch, AccelSample, BoutSummary, EpochDecision,
            SignalError, TriggerConfig};

/// Emitted once per completed bout by [`MvpaStream`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoutOutcome {
    pub bout: BoutSummary,
    /// Epoch decision over the trailing window ending at this bout.
    pub epoch: EpochDecision,
    /// True when the epoch decision transitioned false→true at this bout.
    pub rising_edge: bool,
    /// Completion time of the bout (its start plus the bout length).
    pub end_t: f64,
}

/// Streaming bout accumulator and epoch detector.
///
/// Bouts are aligned to the session start time, not wall-clock minutes, so a
/// replayed trace always produces the same boundaries. Samples must arrive
/// with strictly increasing timestamps at or after the session start. Gaps
/// spanning whole bouts produce empty low-coverage bouts, keeping the
/// trailing window aligned with elapsed time.
///
/// Single-threaded by design; the emitted values are plain data and safe to
/// move across threads.
#[derive(Debug, Clone)]
pub struct MvpaStream {
    cfg: TriggerConfig,
    session_start: f64,
    bout_idx: u64,
    enmo_sum: f64,
    sample_count: usize,
    last_t: Option<f64>,
    window: VecDeque<BoutSummary>,
    prev_epoch_mvpa: bool,
}

impl MvpaStream {
    pub fn new(cfg: TriggerConfig, session_start: f64) -> Result<Self, SignalError> {
        cfg.validate()?;
        if !session_start.is_finite() {
            return Err(SignalError::InvalidConfig(
                "session_start must be finite".into(),
            ));
        }
        Ok(Self {
            cfg,
            session_start,
            bout_idx: 0,
            enmo_sum: 0.0,
            sample_count: 0,
            last_t: None,
            window: VecDeque::with_capacity(cfg.bouts_per_epoch()),
            prev_epoch_mvpa: false,
        })
    }

    pub fn config(&self) -> &TriggerConfig {
        &self.cfg
    }

    pub fn session_start(&self) -> f64 {
        self.session_start
    }

    /// Feeds one sample. Returns the outcomes of any bouts the sample's
    /// timestamp closed (usually none, one at each bout boundary, several
    /// after a gap).
    pub fn push(&mut self, sample: &AccelSample) -> Result<Vec<BoutOutcome>, SignalError> {
        if sample.t < self.session_start {
            return Err(SignalError::BeforeSessionStart {
                t: sample.t,
                session_start: self.session_start,
            });
        }
        if let Some(prev) = self.last_t {
            if sample.t <= prev {
                return Err(SignalError::NonMonotonicTime {
                    prev,
                    t: sample.t,
                });
            }
        }
        let enmo = compute_enmo(sample)?;
        self.last_t = Some(sample.t);

        let bout_len = self.cfg.bout_seconds as f64;
        let target = ((sample.t - self.session_start) / bout_len).floor() as u64;
        let mut completed = Vec::new();
        while self.bout_idx < target {
            completed.push(self.finalize_current());
        }
        self.enmo_sum += enmo;
        self.sample_count += 1;
        Ok(completed)
    }

    /// Feeds a slice of samples, concatenating the completed-bout outcomes.
    pub fn push_all(&mut self, samples: &[AccelSample]) -> Result<Vec<BoutOutcome>, SignalError> {
        let mut out = Vec::new();
        for s in samples {
            out.append(&mut self.push(s)?);
        }
        Ok(out)
    }

    /// Count of samples accumulated in the not-yet-complete bout.
    pub fn pending_samples(&self) -> usize {
        self.sample_count
    }

    fn finalize_current(&mut self) -> BoutOutcome {
        let bout_len = self.cfg.bout_seconds as f64;
        let start_t = self.session_start + self.bout_idx as f64 * bout_len;
        let bout = finish_bout(start_t, self.enmo_sum, self.sample_count, &self.cfg);
        self.enmo_sum = 0.0;
        self.sample_count = 0;
        self.bout_idx += 1;

        if self.window.len() == self.cfg.bouts_per_epoch() {
            self.window.pop_front();
        }
        self.window.push_back(bout);
        let (older, newer) = self.window.as_slices();
        let epoch = if newer.is_empty() {
            detect_mvpa_epoch(older, &self.cfg)
        } else {
            // VecDeque wrapped; evaluate on a contiguous copy.
            let contiguous: Vec<BoutSummary> =
                older.iter().chain(newer.iter()).copied().collect();
            detect_mvpa_epoch(&contiguous, &self.cfg)
        };
        let rising_edge = epoch.is_mvpa_epoch && !self.prev_epoch_mvpa;
        self.prev_epoch_mvpa = epoch.is_mvpa_epoch;
        BoutOutcome {
            bout,
            epoch,
            rising_edge,
            end_t: start_t + bout_len,
        }
    }
}

/// Replays a whole trace through a fresh [`MvpaStream`]. The trailing
/// partial bout, if any, is discarded.
pub fn evaluate_trace(
    samples: &[AccelSample],
    cfg: TriggerConfig,
    session_start: f64,
) -> Result<Vec<BoutOutcome>, SignalError> {
    let mut stream = MvpaStream::new(cfg, session_start)?;
    stream.push_all(samples)
}

/// Extracts the rising-edge trigger timestamps from a sequence of outcomes.
pub fn trigger_timestamps(outcomes: &[BoutOutcome]) -> Vec<f64> {
    outcomes
        .iter()
        .filter(|o| o.rising_edge)
        .map(|o| o.end_t)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_trace(az: f64, seconds: f64, rate: u32, start: f64) -> Vec<AccelSample> {
        let n = (seconds * rate as f64) as usize;
        (0..n)
            .map(|i| AccelSample::new(start + i as f64 / rate as f64, 0.0, 0.0, az))
            .collect()
    }

    #[test]
    fn seven_minutes_of_vigorous_motion_triggers_once() {
        let cfg = TriggerConfig::default();
        let trace = constant_trace(1.15, 420.0, 32, 100.0);
        let outcomes = evaluate_trace(&trace, cfg, 100.0).unwrap();
        // 420 s of samples, last bout closes only when a later sample
        // arrives, so 27 complete bouts and no trigger yet.
        assert_eq!(outcomes.len(), 27);
        assert!(trigger_timestamps(&outcomes).is_empty());

        // One more bout of data closes bout 28 and the epoch fires.
        let mut stream = MvpaStream::new(cfg, 100.0).unwrap();
        stream.push_all(&trace).unwrap();
        let more = constant_trace(1.15, 15.0, 32, 520.0);
        let outcomes = stream.push_all(&more).unwrap();
        let triggers = trigger_timestamps(&outcomes);
        assert_eq!(triggers, vec![100.0 + 420.0]);
    }

    #[test]
    fn sustained_motion_is_edge_triggered() {
        let cfg = TriggerConfig::default();
        let trace = constant_trace(1.15, 14.0 * 60.0, 32, 0.0);
        let outcomes = evaluate_trace(&trace, cfg, 0.0).unwrap();
        let triggers = trigger_timestamps(&outcomes);
        assert_eq!(triggers, vec![420.0], "one edge for 14 minutes of motion");
    }

    #[test]
    fn stationary_trace_never_triggers() {
        let cfg = TriggerConfig::default();
        let trace = constant_trace(1.0, 420.0, 32, 0.0);
        let outcomes = evaluate_trace(&trace, cfg, 0.0).unwrap();
        assert!(outcomes.iter().all(|o| !o.epoch.is_mvpa_epoch));
    }

    #[test]
    fn gap_produces_empty_low_coverage_bouts() {
        let cfg = TriggerConfig::default();
        let mut stream = MvpaStream::new(cfg, 0.0).unwrap();
        stream
            .push_all(&constant_trace(1.15, 15.0, 32, 0.0))
            .unwrap();
        // Jump over two whole bouts.
        let outcomes = stream
            .push(&AccelSample::new(45.5, 0.0, 0.0, 1.0))
            .unwrap();
        assert_eq!(outcomes.len(), 3);
        assert!(!outcomes[0].bout.low_coverage);
        assert!(outcomes[1].bout.low_coverage);
        assert_eq!(outcomes[1].bout.sample_count, 0);
        assert_eq!(outcomes[2].bout.sample_count, 0);
    }

    #[test]
    fn non_monotonic_time_is_rejected() {
        let cfg = TriggerConfig::default();
        let mut stream = MvpaStream::new(cfg, 0.0).unwrap();
        stream.push(&AccelSample::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        let err = stream.push(&AccelSample::new(1.0, 0.0, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, SignalError::NonMonotonicTime { .. }));
        let err = stream.push(&AccelSample::new(-3.0, 0.0, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, SignalError::BeforeSessionStart { .. }));
    }

    #[test]
    fn chunked_and_whole_replays_agree() {
        let cfg = TriggerConfig::default();
        let trace: Vec<AccelSample> = (0..(600 * 32))
            .map(|i| {
                let t = i as f64 / 32.0;
                // Deterministic activity mix: vigorous in the middle stretch.
                let az = if (200.0..480.0).contains(&t) { 1.2 } else { 1.0 };
                AccelSample::new(t, 0.01, -0.02, az)
            })
            .collect();
        let whole = evaluate_trace(&trace, cfg, 0.0).unwrap();

        let mut stream = MvpaStream::new(cfg, 0.0).unwrap();
        let mut chunked = Vec::new();
        for chunk in trace.chunks(97) {
            chunked.extend(stream.push_all(chunk).unwrap());
        }
        assert_eq!(whole, chunked);
        assert_eq!(
            trigger_timestamps(&whole),
            trigger_timestamps(&chunked)
        );
    }
}
