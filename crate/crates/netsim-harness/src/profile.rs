//! Synthetic participant behavior: a daily piecewise activity schedule
//! mapped onto accelerometer generators, plus a deterministic GPS walk.
//!
//! Generator calibration (documented constants, checked by test):
//! sedentary noise keeps mean ENMO below 0.02 g, walking sits near 0.06 g,
//! and vigorous bursts near 0.28 g — comfortably above the 0.1006 g bout
//! threshold. Sample generation is stateless in `(seed, day, bout index)`
//! so any consumer regenerates identical traces in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use signal_core::AccelSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Sedentary,
    Walking,
    Vigorous,
}

/// One contiguous stretch of a day's schedule, in seconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityBlock {
    pub start_s: u32,
    pub end_s: u32,
    pub activity: Activity,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-participant daily schedule generator.
#[derive(Debug, Clone)]
pub struct ActivityProfile {
    seed: u64,
    window_start_s: u32,
    window_end_s: u32,
}

impl ActivityProfile {
    pub fn new(seed: u64, window_start_s: u32, window_end_s: u32) -> Self {
        Self {
            seed,
            window_start_s,
            window_end_s,
        }
    }

    /// The day's schedule: mostly sedentary with 2–3 walking stretches and
    /// 1–3 vigorous bursts of 8–20 minutes, all inside the window.
    pub fn day_schedule(&self, day: u32) -> Vec<ActivityBlock> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, day as u64, 0xDA11));
        let mut blocks = vec![ActivityBlock {
            start_s: self.window_start_s,
            end_s: self.window_end_s,
            activity: Activity::Sedentary,
        }];
        let mut carve = |blocks: &mut Vec<ActivityBlock>, rng: &mut ChaCha8Rng, activity, dur_lo: u32, dur_hi: u32| {
            let dur = rng.random_range(dur_lo..dur_hi);
            let latest = self.window_end_s.saturating_sub(dur);
            if latest <= self.window_start_s {
                return;
            }
            let start = rng.random_range(self.window_start_s..latest);
            let end = start + dur;
            // Only carve into purely sedentary territory to keep blocks
            // disjoint and the schedule simple.
            let mut out = Vec::with_capacity(blocks.len() + 2);
            let mut placed = false;
            for b in blocks.iter() {
                if b.activity == Activity::Sedentary && b.start_s <= start && end <= b.end_s {
                    if b.start_s < start {
                        out.push(ActivityBlock {
                            start_s: b.start_s,
                            end_s: start,
                            activity: Activity::Sedentary,
                        });
                    }
                    out.push(ActivityBlock {
                        start_s: start,
                        end_s: end,
                        activity,
                    });
                    if end < b.end_s {
                        out.push(ActivityBlock {
                            start_s: end,
                            end_s: b.end_s,
                            activity: Activity::Sedentary,
                        });
                    }
                    placed = true;
                } else {
                    out.push(*b);
                }
            }
            if placed {
                *blocks = out;
            }
        };
        let bursts = rng.random_range(1..=3);
        for _ in 0..bursts {
            carve(&mut blocks, &mut rng, Activity::Vigorous, 8 * 60, 20 * 60);
        }
        let walks = rng.random_range(2..=3);
        for _ in 0..walks {
            carve(&mut blocks, &mut rng, Activity::Walking, 10 * 60, 30 * 60);
        }
        blocks
    }

    pub fn activity_at(&self, day: u32, day_second: f64) -> Activity {
        self.day_schedule(day)
            .iter()
            .find(|b| day_second >= b.start_s as f64 && day_second < b.end_s as f64)
            .map(|b| b.activity)
            .unwrap_or(Activity::Sedentary)
    }

    /// Generates the accelerometer samples of one bout, stateless in
    /// `(day, bout_index)`. Timestamps are absolute scenario seconds.
    pub fn bout_samples(
        &self,
        day: u32,
        bout_index: u32,
        bout_start_abs: f64,
        bout_seconds: u32,
        rate_hz: u32,
    ) -> Vec<AccelSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(
            self.seed,
            day as u64,
            0xB0_0700 + bout_index as u64,
        ));
        let n = (bout_seconds * rate_hz) as usize;
        let day_second = self.window_start_s as f64 + (bout_index * bout_seconds) as f64;
        let activity = self.activity_at(day, day_second);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let dt = i as f64 / rate_hz as f64;
            let t = bout_start_abs + dt;
            let az = match activity {
                Activity::Sedentary => 1.0 + rng.random_range(-0.008..0.008),
                Activity::Walking => {
                    1.0 + 0.06
                        + 0.02 * (std::f64::consts::TAU * 1.8 * dt).sin()
                        + rng.random_range(-0.02..0.02)
                }
                Activity::Vigorous => {
                    1.0 + 0.28
                        + 0.08 * (std::f64::consts::TAU * 2.2 * dt).sin()
                        + rng.random_range(-0.06..0.06)
                }
            };
            let ax = rng.random_range(-0.01..0.01);
            let ay = rng.random_range(-0.01..0.01);
            out.push(AccelSample::new(t, ax, ay, az));
        }
        out
    }

    /// Deterministic GPS position for a given sampling minute: a home base
    /// with a small bounded wander.
    pub fn gps_at(&self, day: u32, minute_index: u32) -> (f64, f64) {
        let base_lat = 40.70 + (mix(self.seed, 0, 1) % 1000) as f64 / 10_000.0;
        let base_lon = -111.95 + (mix(self.seed, 0, 2) % 1000) as f64 / 10_000.0;
        let h = mix(self.seed, day as u64, 0x69_5000 + minute_index as u64);
        let dlat = ((h % 2001) as f64 - 1000.0) / 50_000.0;
        let dlon = (((h >> 20) % 2001) as f64 - 1000.0) / 50_000.0;
        (base_lat + dlat, base_lon + dlon)
    }
}
