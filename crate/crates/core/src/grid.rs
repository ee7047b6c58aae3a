//! Uniform axes and the numeric text format shared by all outputs.

use serde::Serialize;

use crate::error::{Error, Result};

/// `count` equally spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidConfig(format!("bad axis range [{lo}, {hi}]")));
        }
        if count == 0 || (count == 1 && hi != lo) {
            return Err(Error::InvalidConfig(format!(
                "axis over [{lo}, {hi}] needs at least 2 points"
            )));
        }
        Ok(Axis { lo, hi, count })
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.count - 1) as f64
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Nine significant digits in scientific notation; `NaN` for missing values.
pub fn fmt9(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.8e}")
    }
}

/// Comma-separated rows with a header line and LF endings.
pub fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt9).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
