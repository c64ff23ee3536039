//! The quality score and its two components.
//!
//! * `q_a1` rescales the suite-mean accuracy so that perfect accuracy maps to
//!   0 and anything no better than random guessing (`1/c`) maps to 1.
//! * `q_a2` averages, over error types, the suite-mean accuracy change caused
//!   by injecting a small fraction `p` of that error into the training data.
//!   Changes not exceeding `p` are ignored; the sum is scaled by
//!   `factor / |E|` and capped at 1.
//! * `q_a = max(q_a1, q_a2)`.

mod assess;

pub use assess::{
    assess, assess_with_test, score_split, AssessConfig, QualityScore, ResampleRecord,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::AccuracyVector;

/// Suite-mean accuracy `A_M(D)`.
pub fn mean_accuracy(acc: &AccuracyVector) -> Result<f64> {
    if acc.is_empty() {
        return Err(Error::EmptySuite);
    }
    Ok(acc.values().sum::<f64>() / acc.len() as f64)
}

fn check_class_count(c: usize) -> Result<()> {
    if c < 2 {
        return Err(Error::InvalidParameter(format!(
            "class count must be >= 2, got {c}"
        )));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// 1 when `a_m` beats random guessing strictly, else 0.
pub fn delta1(a_m: f64, c: usize) -> Result<u8> {
    check_class_count(c)?;
    check_unit("mean accuracy", a_m)?;
    Ok(u8::from(a_m > 1.0 / c as f64))
}

pub fn q_a1(a_m: f64, c: usize) -> Result<f64> {
    let gate = f64::from(delta1(a_m, c)?);
    let c = c as f64;
    Ok(1.0 - (c * a_m - 1.0) / (c - 1.0) * gate)
}

/// Mean absolute per-model accuracy change `ΔA_{M,e}`.
pub fn delta_accuracy(base: &AccuracyVector, corrupted: &AccuracyVector) -> Result<f64> {
    if base.is_empty() {
        return Err(Error::EmptySuite);
    }
    if !base.same_suite(corrupted) {
        return Err(Error::SuiteMismatch);
    }
    let total: f64 = base
        .values()
        .zip(corrupted.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / base.len() as f64)
}

/// 1 when the accuracy change strictly exceeds `p` (both as fractions).
pub fn delta2(delta_a: f64, p: f64) -> u8 {
    u8::from(delta_a > p)
}

/// `min(factor / |E| * Σ_e ΔA_e·δ2(ΔA_e), 1)`.
pub fn q_a2(deltas: impl IntoIterator<Item = f64>, p: f64, factor: f64) -> Result<f64> {
    if factor.is_nan() || factor <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sensitivity factor must be > 0, got {factor}"
        )));
    }
    let (sum, count) = deltas.into_iter().fold((0.0, 0usize), |(s, n), d| {
        (s + d * f64::from(delta2(d, p)), n + 1)
    });
    if count == 0 {
        return Err(Error::EmptyDeltas);
    }
    Ok((factor / count as f64 * sum).min(1.0))
}

pub fn combine_max(q1: f64, q2: f64) -> f64 {
    q1.max(q2)
}

/// Convex blend `alpha·q1 + (1-alpha)·q2`. Kept for comparison only; the
/// score itself uses [`combine_max`]. The result is clamped to the segment
/// between `q1` and `q2` so rounding never leaves it.
pub fn combine_alpha(q1: f64, q2: f64, alpha: f64) -> f64 {
    (alpha * q1 + (1.0 - alpha) * q2).clamp(q1.min(q2), q1.max(q2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityLevel {
    Good,
    Medium,
    Bad,
}

impl fmt::Display for QualityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QualityLevel::Good => "good",
            QualityLevel::Medium => "medium",
            QualityLevel::Bad => "bad",
        })
    }
}

impl FromStr for QualityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "good" => Ok(QualityLevel::Good),
            "medium" => Ok(QualityLevel::Medium),
            "bad" => Ok(QualityLevel::Bad),
            other => Err(Error::InvalidParameter(format!("unknown level '{other}'"))),
        }
    }
}

/// Upper bounds (inclusive) of the good and medium bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub good_upper: f64,
    pub medium_upper: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            good_upper: 0.3,
            medium_upper: 0.6,
        }
    }
}

impl Thresholds {
    pub fn new(good_upper: f64, medium_upper: f64) -> Result<Self> {
        let t = Self {
            good_upper,
            medium_upper,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.good_upper
            && self.good_upper < self.medium_upper
            && self.medium_upper < 1.0)
        {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 < good ({}) < medium ({}) < 1",
                self.good_upper, self.medium_upper
            )));
        }
        Ok(())
    }
}

pub fn interpret(q_a: f64, t: &Thresholds) -> QualityLevel {
    if q_a <= t.good_upper {
        QualityLevel::Good
    } else if q_a <= t.medium_upper {
        QualityLevel::Medium
    } else {
        QualityLevel::Bad
    }
}
