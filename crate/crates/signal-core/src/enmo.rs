use crate::SignalError;

/// Sensor full-scale guard in g. Components beyond this are rejected as
/// implausible rather than silently processed.
pub const SENSOR_FULL_SCALE_G: f64 = 16.0;

/// One calibrated 3-axis acceleration reading in g units.
///
/// The vector still contains the gravity contribution in the norm sense;
/// upstream bias correction is assumed to have been applied already.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    /// Seconds since epoch. Must be strictly increasing within a stream.
    pub t: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl AccelSample {
    pub fn new(t: f64, ax: f64, ay: f64, az: f64) -> Self {
        Self { t, ax, ay, az }
    }

    /// Checks the finiteness and full-scale invariants.
    pub fn validate(&self) -> Result<(), SignalError> {
        for v in [self.t, self.ax, self.ay, self.az] {
            if !v.is_finite() {
                return Err(SignalError::NonFiniteSample);
            }
        }
        for v in [self.ax, self.ay, self.az] {
            if v.abs() > SENSOR_FULL_SCALE_G {
                return Err(SignalError::FullScaleExceeded {
                    value: v,
                    limit: SENSOR_FULL_SCALE_G,
                });
            }
        }
        Ok(())
    }
}

/// Euclidean norm minus one: `max(sqrt(ax² + ay² + az²) − 1, 0)` in g.
///
/// Approximates linear acceleration by removing the 1 g gravity contribution
/// from the vector norm. Negative values (norm below 1 g) are clamped to
/// zero, following the truncating convention of the metric.
pub fn compute_enmo(sample: &AccelSample) -> Result<f64, SignalError> {
    let AccelSample { ax, ay, az, .. } = *sample;
    if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
        return Err(SignalError::NonFiniteSample);
    }
    let norm = (ax * ax + ay * ay + az * az).sqrt();
    Ok((norm - 1.0).max(0.0))
}
