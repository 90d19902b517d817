//! Streaming per-arm moments and the path-dependent confidence terms used by
//! the Sharpe-style indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running count, mean, mean of squares and unbiased variance of one arm.
///
/// Mean and centred sum of squares follow Welford's update; the second raw
/// moment is kept as its own running mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamingMoments {
    count: u64,
    mean: f64,
    second_raw: f64,
    m2: f64,
}

impl StreamingMoments {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one observation. Returns `(x - old_mean) * (x - new_mean)`, the
    /// increment of the centred sum of squares.
    #[inline]
    pub fn update(&mut self, x: f64) -> f64 {
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        self.mean += delta / n;
        let increment = delta * (x - self.mean);
        self.m2 += increment;
        self.second_raw += (x * x - self.second_raw) / n;
        increment
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        for &x in xs {
            m.update(x);
        }
        m
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean, `0` before the first observation.
    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Mean of squared observations.
    #[inline]
    pub fn second_raw(&self) -> f64 {
        self.second_raw
    }

    /// Unbiased variance, defined for two or more observations.
    #[inline]
    pub fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| (self.m2 / (self.count - 1) as f64).max(0.0))
    }

    pub fn centred_sum_of_squares(&self) -> f64 {
        self.m2
    }
}

/// `sqrt(2 ln t / s)`.
pub fn confidence_radius(count: u64, t: f64) -> Result<f64> {
    if count == 0 {
        return Err(Error::UndefinedState(
            "confidence radius requested for an arm with no pulls".into(),
        ));
    }
    if !(t >= 1.0) {
        return Err(Error::UndefinedState(format!("confidence radius needs t >= 1, got {t}")));
    }
    Ok((2.0 * t.ln() / count as f64).sqrt())
}

/// Confidence width of an RSSR or SR-like estimate.
///
/// When `L + V - 3 eps <= 0` the width is undefined; it is then flagged
/// infeasible and carries `+inf` so that index maximisation explores the arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceTerm {
    pub radius: f64,
    pub value: f64,
    pub infeasible: bool,
}

/// `((V + m + 2 eps + L) eps) / ((L + V)(L + V - 3 eps))` where `m` is the
/// second raw moment (RSSR) or the mean (SR-like).
pub fn confidence_term(variance: f64, moment: f64, eps: f64, reg: f64) -> ConfidenceTerm {
    let base = reg + variance;
    let slack = base - 3.0 * eps;
    if slack <= 0.0 {
        return ConfidenceTerm {
            radius: eps,
            value: f64::INFINITY,
            infeasible: true,
        };
    }
    ConfidenceTerm {
        radius: eps,
        value: (variance + moment + 2.0 * eps + reg) * eps / (base * slack),
        infeasible: false,
    }
}

fn require_variance(m: &StreamingMoments) -> Result<f64> {
    m.variance().ok_or_else(|| {
        Error::UndefinedState(format!(
            "variance needs at least 2 observations, have {}",
            m.count()
        ))
    })
}

/// Confidence width for the RSSR estimate (numerator uses the second raw
/// moment).
pub fn rssr_confidence(m: &StreamingMoments, eps: f64, reg: f64) -> Result<ConfidenceTerm> {
    let v = require_variance(m)?;
    Ok(confidence_term(v, m.second_raw(), eps, reg))
}

/// Confidence width for the SR-like estimate (numerator uses the mean).
pub fn srlike_confidence(m: &StreamingMoments, eps: f64, reg: f64) -> Result<ConfidenceTerm> {
    let v = require_variance(m)?;
    Ok(confidence_term(v, m.mean(), eps, reg))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub rssr: f64,
    pub sr_like: f64,
    pub sr: f64,
    pub variance: f64,
}

pub fn estimates(m: &StreamingMoments, reg: f64) -> Result<Estimates> {
    let v = require_variance(m)?;
    let x = m.mean();
    Ok(Estimates {
        rssr: x * x / (reg + v),
        sr_like: x / (reg + v),
        sr: x / (reg + v.sqrt()),
        variance: v,
    })
}
