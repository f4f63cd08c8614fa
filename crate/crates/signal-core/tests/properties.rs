//! Property tests pinning the detector against an independent brute-force
//! oracle, plus the algebraic invariants of the ENMO metric itself.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signal_core::{
    compute_enmo, evaluate_trace, trigger_timestamps, AccelSample, TriggerConfig,
};

/// Brute-force re-derivation of bout labels and rising-edge trigger times.
///
/// Kept deliberately separate from the streaming implementation: it bins the
/// raw samples, recomputes every ENMO value from scratch, re-averages each
/// 15-second window, and re-counts MVPA seconds over the trailing epoch.
fn oracle_triggers(samples: &[AccelSample], cfg: &TriggerConfig, start: f64) -> Vec<f64> {
    let bout_len = cfg.bout_seconds as f64;
    let last_t = match samples.last() {
        Some(s) => s.t,
        None => return Vec::new(),
    };
    // Only bouts strictly before the one containing the last sample are
    // complete (the final bout is still open when the stream ends).
    let open_bout = ((last_t - start) / bout_len).floor() as usize;

    let mut sums = vec![0.0_f64; open_bout + 1];
    let mut counts = vec![0usize; open_bout + 1];
    for s in samples {
        let idx = ((s.t - start) / bout_len).floor() as usize;
        let norm = (s.ax * s.ax + s.ay * s.ay + s.az * s.az).sqrt();
        sums[idx] += (norm - 1.0).max(0.0);
        counts[idx] += 1;
    }

    let half = (cfg.sample_rate_hz * cfg.bout_seconds) as usize;
    let mvpa: Vec<bool> = (0..open_bout)
        .map(|i| {
            let enough = counts[i] * 2 >= half;
            let mean = if counts[i] == 0 {
                0.0
            } else {
                sums[i] / counts[i] as f64
            };
            enough && mean > cfg.mvpa_threshold_g
        })
        .collect();

    let per_epoch = (cfg.epoch_seconds / cfg.bout_seconds) as usize;
    let mut triggers = Vec::new();
    let mut prev = false;
    for k in 0..mvpa.len() {
        let decided = if k + 1 >= per_epoch {
            let window = &mvpa[k + 1 - per_epoch..=k];
            let seconds: u32 =
                window.iter().filter(|&&m| m).count() as u32 * cfg.bout_seconds;
            seconds >= cfg.mvpa_required_seconds
        } else {
            false
        };
        if decided && !prev {
            triggers.push(start + (k as f64 + 1.0) * bout_len);
        }
        prev = decided;
    }
    triggers
}

/// Synthetic activity trace: alternating segments whose intensity is drawn
/// per segment, so MVPA stretches of varying length appear.
fn random_trace(seed: u64, total_seconds: f64, start: f64) -> Vec<AccelSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = 32u32;
    let n = (total_seconds * rate as f64) as usize;
    let mut samples = Vec::with_capacity(n);
    let mut level = 0.0_f64;
    let mut remaining = 0usize;
    for i in 0..n {
        if remaining == 0 {
            // Segment of 20 s – 3 min at a sedentary, light or vigorous level.
            remaining = rng.random_range((20 * rate)..(180 * rate)) as usize;
            level = match rng.random_range(0..3) {
                0 => rng.random_range(0.0..0.01),
                1 => rng.random_range(0.05..0.095),
                _ => rng.random_range(0.15..0.6),
            };
        }
        remaining -= 1;
        let t = start + i as f64 / rate as f64;
        let jitter = rng.random_range(-0.02..0.02);
        samples.push(AccelSample::new(t, 0.0, 0.0, 1.0 + level + jitter));
    }
    samples
}

/// Rotates a vector around `axis` (normalized inside) by `angle` radians.
fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let k = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let (sin, cos) = angle.sin_cos();
    let dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    let cross = [
        k[1] * v[2] - k[2] * v[1],
        k[2] * v[0] - k[0] * v[2],
        k[0] * v[1] - k[1] * v[0],
    ];
    [
        v[0] * cos + cross[0] * sin + k[0] * dot * (1.0 - cos),
        v[1] * cos + cross[1] * sin + k[1] * dot * (1.0 - cos),
        v[2] * cos + cross[2] * sin + k[2] * dot * (1.0 - cos),
    ]
}

proptest! {
    #[test]
    fn enmo_is_never_negative(
        ax in -16.0..16.0f64,
        ay in -16.0..16.0f64,
        az in -16.0..16.0f64,
    ) {
        let e = compute_enmo(&AccelSample::new(0.0, ax, ay, az)).unwrap();
        prop_assert!(e >= 0.0);
    }

    #[test]
    fn enmo_is_rotation_invariant(
        ax in -4.0..4.0f64,
        ay in -4.0..4.0f64,
        az in -4.0..4.0f64,
        kx in -1.0..1.0f64,
        ky in -1.0..1.0f64,
        kz in -1.0..1.0f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        prop_assume!(kx.abs() + ky.abs() + kz.abs() > 1e-3);
        let base = compute_enmo(&AccelSample::new(0.0, ax, ay, az)).unwrap();
        let [rx, ry, rz] = rotate([ax, ay, az], [kx, ky, kz], angle);
        let rotated = compute_enmo(&AccelSample::new(0.0, rx, ry, rz)).unwrap();
        prop_assert!((base - rotated).abs() < 1e-12, "{base} vs {rotated}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn streaming_triggers_match_brute_force_oracle(
        seed in 0u64..10_000,
        minutes in 7u32..25,
    ) {
        let cfg = TriggerConfig::default();
        let start = 1000.0;
        let trace = random_trace(seed, minutes as f64 * 60.0, start);
        let outcomes = evaluate_trace(&trace, cfg, start).unwrap();
        let streaming = trigger_timestamps(&outcomes);
        let oracle = oracle_triggers(&trace, &cfg, start);
        prop_assert_eq!(streaming, oracle);
    }
}

#[test]
fn epoch_monotone_under_upgraded_bouts() {
    // Upgrading any single non-MVPA bout to MVPA never turns a triggering
    // window into a non-triggering one, across random windows.
    let cfg = TriggerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let flags: Vec<bool> = (0..28).map(|_| rng.random_bool(0.5)).collect();
        let build = |flags: &[bool]| {
            flags
                .iter()
                .enumerate()
                .map(|(i, &m)| signal_core::BoutSummary {
                    start_t: i as f64 * 15.0,
                    duration_s: 15.0,
                    mean_enmo: if m { 0.3 } else { 0.0 },
                    is_mvpa: m,
                    sample_count: 480,
                    low_coverage: false,
                })
                .collect::<Vec<_>>()
        };
        let before = signal_core::detect_mvpa_epoch(&build(&flags), &cfg).is_mvpa_epoch;
        for i in 0..28 {
            if !flags[i] {
                let mut upgraded = flags.clone();
                upgraded[i] = true;
                let after =
                    signal_core::detect_mvpa_epoch(&build(&upgraded), &cfg).is_mvpa_epoch;
                assert!(!before || after, "upgrade at {i} flipped true→false");
            }
        }
    }
}
