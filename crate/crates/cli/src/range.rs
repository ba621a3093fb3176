//! Parameter ranges: `start:stop:step` (inclusive), `a,b,c`, or a single value.

use crate::error::{CliError, CliResult};

/// Slack on the inclusive stop, in units of the step.
const STOP_SLACK: f64 = 1e-9;

pub fn parse_range(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: String| CliError::usage(format!("--{flag} {text:?}: {msg}"));
    let num = |s: &str| -> CliResult<f64> {
        let x: f64 = s.trim().parse().map_err(|_| bad(format!("{s:?} is not a number")))?;
        if !x.is_finite() {
            return Err(bad(format!("{s:?} is not finite")));
        }
        Ok(x)
    };
    let text_t = text.trim();
    if text_t.is_empty() {
        return Err(bad("empty value".into()));
    }
    if text_t.contains(':') {
        let parts: Vec<&str> = text_t.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step".into()));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 {
            return Err(bad(format!("step {step} must be positive")));
        }
        if stop < start {
            return Ok(Vec::new());
        }
        let n = ((stop - start) / step + STOP_SLACK).floor() as usize + 1;
        return Ok((0..n).map(|i| snap(start + i as f64 * step)).collect());
    }
    text_t.split(',').map(num).collect()
}

fn snap(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if (r - x).abs() < 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Nonnegative integer values.
pub fn parse_counts(flag: &str, text: &str) -> CliResult<Vec<u64>> {
    parse_range(flag, text)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u64)
            } else {
                Err(CliError::usage(format!("--{flag}: {x} is not a nonnegative integer")))
            }
        })
        .collect()
}
