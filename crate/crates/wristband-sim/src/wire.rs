//! Wire encoding for the command/notification channel: one kind tag byte
//! followed by a little-endian payload. An alternate transport can replace
//! the in-process channel by speaking exactly these frames.
//!
//! Commands:
//! - `0x01` StartCollection (no payload)
//! - `0x02` StopCollection (no payload)
//! - `0x03` SetParticipantId: u16 length + UTF-8 bytes
//! - `0x04` SetTime: f64 seconds
//! - `0x05` EraseStorage (no payload)
//!
//! Notifications:
//! - `0x81` MvpaEpoch: f64 t
//! - `0x82` BatteryLevel: f64 t, f64 pct
//! - `0x83` StorageLevel: f64 t, f64 used_pct
//! - `0x84` ChargingStatus: f64 t, u8 charging

use crate::{BandCommand, BandError, BandNotification};

fn take_f64(buf: &[u8], off: usize) -> Result<f64, BandError> {
    let bytes: [u8; 8] = buf
        .get(off..off + 8)
        .ok_or_else(|| BandError::Wire("truncated f64 field".into()))?
        .try_into()
        .expect("slice length checked");
    Ok(f64::from_le_bytes(bytes))
}

pub fn encode_command(cmd: &BandCommand) -> Vec<u8> {
    match cmd {
        BandCommand::StartCollection => vec![0x01],
        BandCommand::StopCollection => vec![0x02],
        BandCommand::SetParticipantId(id) => {
            let mut out = vec![0x03];
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            out
        }
        BandCommand::SetTime(t) => {
            let mut out = vec![0x04];
            out.extend_from_slice(&t.to_le_bytes());
            out
        }
        BandCommand::EraseStorage => vec![0x05],
    }
}

pub fn decode_command(frame: &[u8]) -> Result<BandCommand, BandError> {
    let tag = *frame
        .first()
        .ok_or_else(|| BandError::Wire("empty frame".into()))?;
    match tag {
        0x01 => Ok(BandCommand::StartCollection),
        0x02 => Ok(BandCommand::StopCollection),
        0x03 => {
            let len = u16::from_le_bytes(
                frame
                    .get(1..3)
                    .ok_or_else(|| BandError::Wire("truncated id length".into()))?
                    .try_into()
                    .expect("length checked"),
            ) as usize;
            let bytes = frame
                .get(3..3 + len)
                .ok_or_else(|| BandError::Wire("truncated participant id".into()))?;
            let id = std::str::from_utf8(bytes)
                .map_err(|_| BandError::Wire("participant id is not UTF-8".into()))?;
            Ok(BandCommand::SetParticipantId(id.to_string()))
        }
        0x04 => Ok(BandCommand::SetTime(take_f64(frame, 1)?)),
        0x05 => Ok(BandCommand::EraseStorage),
        other => Err(BandError::Wire(format!("unknown command tag 0x{other:02X}"))),
    }
}

pub fn encode_notification(note: &BandNotification) -> Vec<u8> {
    match note {
        BandNotification::MvpaEpoch { t } => {
            let mut out = vec![0x81];
            out.extend_from_slice(&t.to_le_bytes());
            out
        }
        BandNotification::BatteryLevel { t, pct } => {
            let mut out = vec![0x82];
            out.extend_from_slice(&t.to_le_bytes());
            out.extend_from_slice(&pct.to_le_bytes());
            out
        }
        BandNotification::StorageLevel { t, used_pct } => {
            let mut out = vec![0x83];
            out.extend_from_slice(&t.to_le_bytes());
            out.extend_from_slice(&used_pct.to_le_bytes());
            out
        }
        BandNotification::ChargingStatus { t, charging } => {
            let mut out = vec![0x84];
            out.extend_from_slice(&t.to_le_bytes());
            out.push(u8::from(*charging));
            out
        }
    }
}

pub fn decode_notification(frame: &[u8]) -> Result<BandNotification, BandError> {
    let tag = *frame
        .first()
        .ok_or_else(|| BandError::Wire("empty frame".into()))?;
    match tag {
        0x81 => Ok(BandNotification::MvpaEpoch {
            t: take_f64(frame, 1)?,
        }),
        0x82 => Ok(BandNotification::BatteryLevel {
            t: take_f64(frame, 1)?,
            pct: take_f64(frame, 9)?,
        }),
        0x83 => Ok(BandNotification::StorageLevel {
            t: take_f64(frame, 1)?,
            used_pct: take_f64(frame, 9)?,
        }),
        0x84 => Ok(BandNotification::ChargingStatus {
            t: take_f64(frame, 1)?,
            charging: *frame
                .get(9)
                .ok_or_else(|| BandError::Wire("truncated charging flag".into()))?
                != 0,
        }),
        other => Err(BandError::Wire(format!(
            "unknown notification tag 0x{other:02X}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commands_round_trip() {
        let cases = [
            BandCommand::StartCollection,
            BandCommand::StopCollection,
            BandCommand::SetParticipantId("study088".into()),
            BandCommand::SetTime(1_767_571_200.5),
            BandCommand::EraseStorage,
        ];
        for cmd in cases {
            assert_eq!(decode_command(&encode_command(&cmd)).unwrap(), cmd);
        }
    }

    #[test]
    fn notifications_round_trip() {
        let cases = [
            BandNotification::MvpaEpoch { t: 420.0 },
            BandNotification::BatteryLevel { t: 1.0, pct: 19.5 },
            BandNotification::StorageLevel { t: 2.0, used_pct: 100.0 },
            BandNotification::ChargingStatus { t: 3.0, charging: true },
        ];
        for note in cases {
            assert_eq!(decode_notification(&encode_notification(&note)).unwrap(), note);
        }
    }

    #[test]
    fn malformed_frames_are_rejected() {
        assert!(decode_command(&[]).is_err());
        assert!(decode_command(&[0x77]).is_err());
        assert!(decode_command(&[0x04, 1, 2]).is_err());
        assert!(decode_command(&[0x03, 10, 0, b'a']).is_err());
        assert!(decode_notification(&[0x82, 0, 0, 0, 0, 0, 0, 0, 0]).is_err());
    }
}
