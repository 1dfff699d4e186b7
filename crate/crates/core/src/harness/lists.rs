//! Parsers for the sweep arguments.

use crate::error::{Error, Result};

/// Comma-separated bandwidths in Hz, e.g. `5e6,10e6,15e6,20e6`.
pub fn parse_bw_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::invalid("bw", "empty bandwidth list"));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let v: f64 = item
                .parse()
                .map_err(|_| Error::invalid("bw", format!("`{item}` is not a number")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("bw", format!("`{item}` must be a positive bandwidth")));
            }
            Ok(v)
        })
        .collect()
}

/// Largest number of points a power sweep may expand to.
pub const MAX_SWEEP_POINTS: usize = 1000;

/// Integer dBm range `lo..hi` (inclusive, step 1), `lo..hi:step`, or a
/// comma-separated list of values.
pub fn parse_dbm_range(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::invalid("dbm", "empty power range"));
    }
    let Some((lo, rest)) = text.split_once("..") else {
        return text
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::invalid("dbm", format!("`{item}` is not a number")))
            })
            .collect();
    };
    let (hi, step) = match rest.split_once(':') {
        Some((hi, step)) => (hi, step),
        None => (rest, "1"),
    };
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid("dbm", format!("`{}` is not a number", s.trim())))
    };
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if step <= 0.0 {
        return Err(Error::invalid("dbm", "step must be positive"));
    }
    if hi < lo {
        return Err(Error::invalid("dbm", "range end is below its start"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SWEEP_POINTS {
        return Err(Error::invalid(
            "dbm",
            format!("range expands to more than {MAX_SWEEP_POINTS} points"),
        ));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}
