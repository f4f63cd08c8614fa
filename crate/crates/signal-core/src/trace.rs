//! Trace replay and trigger report file formats.
//!
//! A trace file is newline-delimited `t,ax,ay,az` records, decimal, in
//! seconds and g. A trigger report is one trigger timestamp per line.

use std::io::{BufRead, Write};

use crate::{AccelSample, SignalError};

/// Reads a trace, validating finiteness, the full-scale guard, and strict
/// timestamp monotonicity.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<AccelSample>, SignalError> {
    let mut samples = Vec::new();
    let mut prev_t: Option<f64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SignalError::TraceIo(e.to_string()))?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let mut next_field = |name: &str| -> Result<f64, SignalError> {
            let raw = fields.next().ok_or_else(|| SignalError::TraceParse {
                line: line_no,
                reason: format!("missing field `{name}`"),
            })?;
            raw.trim().parse::<f64>().map_err(|_| SignalError::TraceParse {
                line: line_no,
                reason: format!("field `{name}` is not a decimal number: `{raw}`"),
            })
        };
        let sample = AccelSample::new(
            next_field("t")?,
            next_field("ax")?,
            next_field("ay")?,
            next_field("az")?,
        );
        if fields.next().is_some() {
            return Err(SignalError::TraceParse {
                line: line_no,
                reason: "expected exactly four fields `t,ax,ay,az`".into(),
            });
        }
        sample.validate().map_err(|e| SignalError::TraceParse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if let Some(prev) = prev_t {
            if sample.t <= prev {
                return Err(SignalError::TraceParse {
                    line: line_no,
                    reason: format!("timestamp {} does not increase past {}", sample.t, prev),
                });
            }
        }
        prev_t = Some(sample.t);
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_trace<W: Write>(mut writer: W, samples: &[AccelSample]) -> Result<(), SignalError> {
    for s in samples {
        writeln!(writer, "{},{},{},{}", s.t, s.ax, s.ay, s.az)
            .map_err(|e| SignalError::TraceIo(e.to_string()))?;
    }
    Ok(())
}

/// Writes a trigger report: one `trigger_t` per line.
pub fn write_trigger_report<W: Write>(mut writer: W, triggers: &[f64]) -> Result<(), SignalError> {
    for t in triggers {
        writeln!(writer, "{t}").map_err(|e| SignalError::TraceIo(e.to_string()))?;
    }
    Ok(())
}

pub fn read_trigger_report<R: BufRead>(reader: R) -> Result<Vec<f64>, SignalError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SignalError::TraceIo(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let t = trimmed.parse::<f64>().map_err(|_| SignalError::TraceParse {
            line: idx + 1,
            reason: format!("not a decimal trigger timestamp: `{trimmed}`"),
        })?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_a_trace() {
        let samples = vec![
            AccelSample::new(0.0, 0.0, 0.0, 1.0),
            AccelSample::new(0.03125, 0.1, -0.2, 0.97),
            AccelSample::new(0.0625, -1.5, 2.25, 0.5),
        ];
        let mut buf = Vec::new();
        write_trace(&mut buf, &samples).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, samples);
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = read_trace("0.0,0.0,1.0".as_bytes()).unwrap_err();
        assert!(matches!(err, SignalError::TraceParse { line: 1, .. }));
        let err = read_trace("0,0,0,1\n1,0,abc,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SignalError::TraceParse { line: 2, .. }));
        let err = read_trace("0,0,0,1\n2,0,0,1\n1,0,0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SignalError::TraceParse { line: 3, .. }));
        let err = read_trace("0,0,0,99\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SignalError::TraceParse { line: 1, .. }));
    }

    #[test]
    fn trigger_report_round_trips() {
        let triggers = vec![420.0, 1234.5];
        let mut buf = Vec::new();
        write_trigger_report(&mut buf, &triggers).unwrap();
        assert_eq!(read_trigger_report(buf.as_slice()).unwrap(), triggers);
    }
}
