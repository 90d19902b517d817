//! Online regret-minimisation policies with a round-robin pilot phase.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::env::Objective;
use crate::error::{config_err, Error, Result};
use crate::estimators::{confidence_radius, confidence_term, StreamingMoments};
use crate::rng::RandomStream;
use crate::special::ChiSquareTable;

pub const DEFAULT_GRA_ALPHA: f64 = 0.05;
/// Normal-Gamma prior used by the Thompson-sampling benchmark.
pub const MVTS_PRIOR_SHAPE: f64 = 0.5;
pub const MVTS_PRIOR_RATE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RmPolicyKind {
    #[serde(rename = "ucb-vv")]
    UcbVv,
    #[serde(rename = "ucb-sr-like")]
    UcbSrLike,
    #[serde(rename = "ucb-rssr")]
    UcbRssr,
    #[serde(rename = "mod-gra-ucb")]
    ModGraUcb,
    #[serde(rename = "mod-mvts")]
    ModMvts,
}

impl RmPolicyKind {
    pub const ALL: [RmPolicyKind; 5] = [
        RmPolicyKind::UcbVv,
        RmPolicyKind::UcbSrLike,
        RmPolicyKind::UcbRssr,
        RmPolicyKind::ModGraUcb,
        RmPolicyKind::ModMvts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RmPolicyKind::UcbVv => "ucb-vv",
            RmPolicyKind::UcbSrLike => "ucb-sr-like",
            RmPolicyKind::UcbRssr => "ucb-rssr",
            RmPolicyKind::ModGraUcb => "mod-gra-ucb",
            RmPolicyKind::ModMvts => "mod-mvts",
        }
    }

    /// The objective whose gaps score this policy's regret.
    pub fn objective(self) -> Objective {
        match self {
            RmPolicyKind::UcbVv => Objective::Variance,
            RmPolicyKind::UcbSrLike => Objective::SrLike,
            _ => Objective::Rssr,
        }
    }
}

impl fmt::Display for RmPolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RmPolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown regret policy '{s}'")))
    }
}

/// Index of the largest value; ties go to the lowest index and `+inf`
/// beats every finite value. NaN never wins.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_val || (i == 0 && !v.is_nan()) {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Number of round-robin pilot steps.
///
/// Without an explicit fraction every arm is pulled twice, the minimum for
/// the unbiased variance to exist.
pub fn pilot_length(horizon: u64, k: usize, delta_pilot: Option<f64>) -> Result<u64> {
    let len = match delta_pilot {
        None => 2 * k as u64,
        Some(d) => {
            if !(0.0..=1.0).contains(&d) {
                return config_err(format!("delta_pilot must lie in [0, 1], got {d}"));
            }
            (d * horizon as f64).floor() as u64
        }
    };
    if len > horizon {
        return config_err(format!(
            "pilot phase of {len} pulls does not fit in horizon n={horizon}"
        ));
    }
    Ok(len)
}

#[inline]
fn radius_or_zero(count: u64, t: f64) -> f64 {
    confidence_radius(count, t.max(1.0)).unwrap_or(f64::INFINITY)
}

/// `V + sqrt(2 ln t / s)`; `+inf` below two pulls.
pub fn index_ucb_vv(m: &StreamingMoments, t: f64) -> f64 {
    match m.variance() {
        Some(v) => v + radius_or_zero(m.count(), t),
        None => f64::INFINITY,
    }
}

/// `X / (L + V)` plus the SR-like confidence width; `+inf` when infeasible.
pub fn index_sr_like(m: &StreamingMoments, t: f64, reg: f64) -> f64 {
    let Some(v) = m.variance() else {
        return f64::INFINITY;
    };
    let eps = radius_or_zero(m.count(), t);
    let c = confidence_term(v, m.mean(), eps, reg);
    if c.infeasible {
        f64::INFINITY
    } else {
        m.mean() / (reg + v) + c.value
    }
}

/// `X^2 / (L + V)` plus the RSSR confidence width; `+inf` when infeasible.
pub fn index_rssr(m: &StreamingMoments, t: f64, reg: f64) -> f64 {
    let Some(v) = m.variance() else {
        return f64::INFINITY;
    };
    let eps = radius_or_zero(m.count(), t);
    let c = confidence_term(v, m.second_raw(), eps, reg);
    if c.infeasible {
        f64::INFINITY
    } else {
        m.mean() * m.mean() / (reg + v) + c.value
    }
}

/// Modified GRA-UCB index
/// `(X + sqrt(ln t / s))^2 / sqrt(L + (s - 1) V^2 / chi2)` with `chi2` the
/// chi-square quantile at `1 - alpha` with `s - 1` degrees of freedom.
pub fn index_mod_gra_ucb(m: &StreamingMoments, t: f64, reg: f64, chi2: f64) -> f64 {
    let Some(v) = m.variance() else {
        return f64::INFINITY;
    };
    let s = m.count() as f64;
    let optimistic_mean = m.mean() + (t.max(1.0).ln() / s).sqrt();
    optimistic_mean * optimistic_mean / (reg + (s - 1.0) * v * v / chi2).sqrt()
}

/// Posterior parameters of the precision in the Normal-Gamma model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPosterior {
    pub shape: f64,
    pub rate: f64,
}

impl Default for PrecisionPosterior {
    fn default() -> Self {
        Self {
            shape: MVTS_PRIOR_SHAPE,
            rate: MVTS_PRIOR_RATE,
        }
    }
}

impl PrecisionPosterior {
    /// Conjugate step for one observation; `centred_increment` is
    /// `(x - old_mean)(x - new_mean)`.
    pub fn update(&mut self, centred_increment: f64) {
        self.shape += 0.5;
        self.rate += 0.5 * centred_increment;
    }
}

/// Modified MVTS index: draws `theta ~ N(X, 1/s)` and
/// `tau ~ Gamma(shape, rate)`, returns `theta^2 / (L + sqrt(1/tau))`.
pub fn index_mod_mvts(
    m: &StreamingMoments,
    posterior: &PrecisionPosterior,
    reg: f64,
    stream: &mut RandomStream,
) -> Result<f64> {
    if m.count() == 0 {
        return Ok(f64::INFINITY);
    }
    let sd = (1.0 / m.count() as f64).sqrt();
    let theta = Normal::new(m.mean(), sd)
        .map_err(|e| Error::Numeric(format!("posterior mean draw: {e}")))?
        .sample(stream);
    let rate = posterior.rate.max(f64::MIN_POSITIVE);
    let tau = Gamma::new(posterior.shape, 1.0 / rate)
        .map_err(|e| Error::Numeric(format!("posterior precision draw: {e}")))?
        .sample(stream);
    Ok(theta * theta / (reg + (1.0 / tau).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmPolicyConfig {
    pub kind: RmPolicyKind,
    pub arms: usize,
    pub horizon: u64,
    pub pilot_len: u64,
    pub regularizer: f64,
    pub gra_alpha: f64,
    /// Declared reward support; observations outside it are logged.
    pub support: Option<(f64, f64)>,
}

impl RmPolicyConfig {
    pub fn new(kind: RmPolicyKind, arms: usize, horizon: u64, regularizer: f64) -> Result<Self> {
        Ok(Self {
            kind,
            arms,
            horizon,
            pilot_len: pilot_length(horizon, arms, None)?,
            regularizer,
            gra_alpha: DEFAULT_GRA_ALPHA,
            support: None,
        })
    }
}

/// Per-replication state of one regret-minimisation policy.
#[derive(Clone, Debug)]
pub struct RmPolicy {
    cfg: RmPolicyConfig,
    per_arm: Vec<StreamingMoments>,
    posteriors: Vec<PrecisionPosterior>,
    chi2: Option<ChiSquareTable>,
    t: u64,
    indices: Vec<f64>,
}

impl RmPolicy {
    pub fn new(cfg: RmPolicyConfig) -> Result<Self> {
        if cfg.arms < 2 {
            return config_err(format!("policy needs K >= 2 arms, got {}", cfg.arms));
        }
        if !(cfg.regularizer > 0.0) || !cfg.regularizer.is_finite() {
            return config_err(format!("regularizer L must be > 0, got {}", cfg.regularizer));
        }
        if cfg.pilot_len > cfg.horizon {
            return config_err(format!(
                "pilot phase {} exceeds horizon {}",
                cfg.pilot_len, cfg.horizon
            ));
        }
        if !(cfg.gra_alpha > 0.0 && cfg.gra_alpha < 1.0) {
            return config_err(format!("alpha must lie in (0, 1), got {}", cfg.gra_alpha));
        }
        let chi2 = (cfg.kind == RmPolicyKind::ModGraUcb).then(|| ChiSquareTable::new(1.0 - cfg.gra_alpha));
        Ok(Self {
            per_arm: vec![StreamingMoments::new(); cfg.arms],
            posteriors: vec![PrecisionPosterior::default(); cfg.arms],
            indices: vec![0.0; cfg.arms],
            chi2,
            t: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &RmPolicyConfig {
        &self.cfg
    }

    pub fn kind(&self) -> RmPolicyKind {
        self.cfg.kind
    }

    /// Observations made so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn arm_stats(&self) -> &[StreamingMoments] {
        &self.per_arm
    }

    pub fn posteriors(&self) -> &[PrecisionPosterior] {
        &self.posteriors
    }

    pub fn pull_counts(&self) -> Vec<u64> {
        self.per_arm.iter().map(|m| m.count()).collect()
    }

    /// Indices computed by the most recent post-pilot selection.
    pub fn last_indices(&self) -> &[f64] {
        &self.indices
    }

    /// Chooses the arm for step `t + 1`: round-robin during the pilot,
    /// otherwise the argmax of the indices computed from the first `t`
    /// observations.
    pub fn select_arm(&mut self, stream: &mut RandomStream) -> Result<usize> {
        if self.t >= self.cfg.horizon {
            return Err(Error::Usage(format!(
                "horizon n={} already exhausted",
                self.cfg.horizon
            )));
        }
        let step = self.t + 1;
        let k = self.cfg.arms;
        if step <= self.cfg.pilot_len {
            return Ok((step % k as u64) as usize);
        }
        self.compute_indices(stream)?;
        Ok(argmax_lowest(&self.indices))
    }

    fn compute_indices(&mut self, stream: &mut RandomStream) -> Result<()> {
        let t = self.t as f64;
        let reg = self.cfg.regularizer;
        for (i, m) in self.per_arm.iter().enumerate() {
            self.indices[i] = match self.cfg.kind {
                RmPolicyKind::UcbVv => index_ucb_vv(m, t),
                RmPolicyKind::UcbSrLike => index_sr_like(m, t, reg),
                RmPolicyKind::UcbRssr => index_rssr(m, t, reg),
                RmPolicyKind::ModGraUcb => {
                    if m.count() < 2 {
                        f64::INFINITY
                    } else {
                        let table = self.chi2.as_mut().expect("chi-square table for GRA-UCB");
                        let q = table.get((m.count() - 1) as usize)?;
                        index_mod_gra_ucb(m, t, reg, q)
                    }
                }
                RmPolicyKind::ModMvts => index_mod_mvts(m, &self.posteriors[i], reg, stream)?,
            };
        }
        Ok(())
    }

    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.cfg.arms {
            return Err(Error::Usage(format!(
                "arm {arm} out of range for K={}",
                self.cfg.arms
            )));
        }
        if !reward.is_finite() {
            return Err(Error::Usage(format!("non-finite reward {reward}")));
        }
        if let Some((l, u)) = self.cfg.support {
            if reward < l || reward > u {
                log::warn!("reward {reward} on arm {arm} outside declared support [{l}, {u}]");
            }
        }
        let increment = self.per_arm[arm].update(reward);
        self.posteriors[arm].update(increment);
        self.t += 1;
        Ok(())
    }
}
