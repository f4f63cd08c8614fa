//! Payload record layouts for the two sensor files.
//!
//! IMU records are 9 little-endian 16-bit values (18 bytes) at 32 Hz with
//! implicit timestamps; the first three hold acceleration in 1/1024 g fixed
//! point, the rest carry the remaining inertial channels. PPG records are
//! three 24-bit little-endian channels (9 bytes) at 64 Hz. At nominal rates
//! each stream costs 576 bytes per second.

pub const IMU_RECORD_LEN: usize = 18;
pub const IMU_VALUES: usize = 9;
pub const PPG_RECORD_LEN: usize = 9;
pub const PPG_CHANNELS: usize = 3;

/// Fixed-point scale for acceleration: 1 LSB = 1/1024 g, range ±32 g.
pub const ACCEL_SCALE: f64 = 1024.0;

/// Encodes one 9-value IMU record. Values saturate at the i16 range.
pub fn encode_imu_record(values: &[f64; IMU_VALUES], out: &mut Vec<u8>) {
    for v in values {
        let fixed = (v * ACCEL_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&fixed.to_le_bytes());
    }
}

/// Encodes an acceleration triple into a full record; the six remaining
/// channels are zero (the simulator models no gyro or magnetometer signal).
pub fn encode_imu_sample(ax: f64, ay: f64, az: f64, out: &mut Vec<u8>) {
    let mut values = [0.0; IMU_VALUES];
    values[0] = ax;
    values[1] = ay;
    values[2] = az;
    encode_imu_record(&values, out);
}

pub fn decode_imu_record(raw: &[u8]) -> Option<[f64; IMU_VALUES]> {
    if raw.len() < IMU_RECORD_LEN {
        return None;
    }
    let mut values = [0.0; IMU_VALUES];
    for (i, v) in values.iter_mut().enumerate() {
        let fixed = i16::from_le_bytes([raw[i * 2], raw[i * 2 + 1]]);
        *v = fixed as f64 / ACCEL_SCALE;
    }
    Some(values)
}

/// Encodes one 3-channel PPG record: 24-bit unsigned little-endian counts.
pub fn encode_ppg_record(channels: &[u32; PPG_CHANNELS], out: &mut Vec<u8>) {
    for c in channels {
        let clamped = (*c).min(0x00FF_FFFF);
        out.extend_from_slice(&clamped.to_le_bytes()[..3]);
    }
}

pub fn decode_ppg_record(raw: &[u8]) -> Option<[u32; PPG_CHANNELS]> {
    if raw.len() < PPG_RECORD_LEN {
        return None;
    }
    let mut channels = [0u32; PPG_CHANNELS];
    for (i, c) in channels.iter_mut().enumerate() {
        *c = u32::from_le_bytes([raw[i * 3], raw[i * 3 + 1], raw[i * 3 + 2], 0]);
    }
    Some(channels)
}
