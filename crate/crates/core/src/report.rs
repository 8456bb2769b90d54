//! Report building blocks shared by the pipelines and the verification suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// `lhs <= rhs`, with both sides, their ratio and a short tag naming the estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub tag: String,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(tag: &str, label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::with_slack(tag, label, lhs, rhs, 0.0)
    }

    /// Holds when `lhs <= rhs + rel |rhs|`.
    pub fn with_slack(tag: &str, label: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        let ratio = if rhs != 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Inequality {
            tag: tag.to_string(),
            label: label.into(),
            lhs,
            rhs,
            ratio,
            holds: lhs <= rhs + rel * rhs.abs(),
        }
    }
}

/// A named pass/fail entry. Soft entries are reported but never fail a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub hard: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            hard: true,
            detail: detail.into(),
        }
    }

    pub fn soft(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            hard: false,
            ..Check::new(name, passed, detail)
        }
    }

    pub fn blocking(&self) -> bool {
        self.hard && !self.passed
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

/// `true` when every entry is strictly smaller than the one before it.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|p| p[1] < p[0])
}

/// `max / min` of positive values (`inf` if some value is not positive).
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}
