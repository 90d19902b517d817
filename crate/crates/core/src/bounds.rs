//! Closed-form regret and error-probability bounds evaluated with true
//! instance moments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bai::{sh_phases, sursr_schedule, BaiKind, SurLog};
use crate::env::{ArmTruth, BanditInstance, Objective};
use crate::error::{Error, Result};
use crate::rm::RmPolicyKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    T1,
    T3,
    T5,
    T6,
    T7,
    T8,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::T1,
        Theorem::T3,
        Theorem::T5,
        Theorem::T6,
        Theorem::T7,
        Theorem::T8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::T1 => "t1",
            Theorem::T3 => "t3",
            Theorem::T5 => "t5",
            Theorem::T6 => "t6",
            Theorem::T7 => "t7",
            Theorem::T8 => "t8",
        }
    }

    /// Error-probability bounds are clamped to `[0, 1]` when reported.
    pub fn is_probability(self) -> bool {
        matches!(self, Theorem::T6 | Theorem::T7 | Theorem::T8)
    }

    pub fn for_rm(kind: RmPolicyKind) -> Option<Theorem> {
        match kind {
            RmPolicyKind::UcbVv => Some(Theorem::T1),
            RmPolicyKind::UcbSrLike => Some(Theorem::T3),
            RmPolicyKind::UcbRssr => Some(Theorem::T5),
            _ => None,
        }
    }

    pub fn for_bai(kind: BaiKind) -> Option<Theorem> {
        match kind {
            BaiKind::Shvv => Some(Theorem::T6),
            BaiKind::Shsr => Some(Theorem::T7),
            BaiKind::Sursr => Some(Theorem::T8),
            BaiKind::Uniform => None,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown theorem '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    /// Per-arm pull bounds (regret theorems, `0` for optimal arms) or
    /// per-phase terms (error theorems).
    pub terms: Vec<f64>,
    /// Unclamped total.
    pub raw: f64,
    /// Total as reported; clamped to `[0, 1]` for probabilities.
    pub value: f64,
}

impl BoundReport {
    fn new(theorem: Theorem, terms: Vec<f64>, raw: f64) -> Self {
        let value = if theorem.is_probability() {
            if raw.is_nan() {
                1.0
            } else {
                raw.clamp(0.0, 1.0)
            }
        } else {
            raw
        };
        Self {
            theorem,
            terms,
            raw,
            value,
        }
    }
}

const TAIL: f64 = 1.0 + PI * PI / 3.0;

fn ln_n(n: f64) -> f64 {
    if n <= 1.0 {
        0.0
    } else {
        n.ln()
    }
}

/// Expected-pull bound of a sub-optimal arm under the variance index:
/// `8 ln n / delta^2 + 1 + pi^2/3`.
pub fn variance_pull_bound(delta: f64, n: f64) -> f64 {
    8.0 * ln_n(n) / (delta * delta) + TAIL
}

/// The `max{18 ln n / L^2, 8 ln n / (gap (mu4 + (sigma^2 + L)^2))}` term
/// shared by the SR-like and RSSR regret bounds.
pub fn sharpe_pull_term(gap: f64, truth: &ArmTruth, reg: f64, n: f64) -> f64 {
    let l = ln_n(n);
    let spread = truth.fourth_central + (truth.variance + reg).powi(2);
    f64::max(18.0 * l / (reg * reg), 8.0 * l / (gap * spread))
}

pub fn sharpe_pull_bound(gap: f64, truth: &ArmTruth, reg: f64, n: f64) -> f64 {
    sharpe_pull_term(gap, truth, reg, n) + TAIL
}

/// Deviation threshold below which an RSSR estimate of this arm stays
/// within half a gap `delta`: the positive root of
/// `2 eps^2 + A eps - delta W^2 / 2 = 0` with `W = L + sigma^2` and
/// `A = (1.5 delta + 1) W + sigma^2 + mu^2`.
pub fn epsilon_threshold(delta: f64, truth: &ArmTruth, reg: f64) -> f64 {
    let w = reg + truth.variance;
    let a = (1.5 * delta + 1.0) * w + truth.second_raw();
    (-a + (a * a + 4.0 * delta * w * w).sqrt()) / 4.0
}

/// `max_{i >= 2} i / delta_(i)^2` over gaps sorted ascending (ranks from 1).
pub fn hardness_h2(gaps: &[f64]) -> f64 {
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, d)| (i + 1) as f64 / (d * d))
        .fold(0.0, f64::max)
}

/// `3 log2 K exp(-(n - K log2 K)^2 / (8 n log2 K u^4 H2))`.
pub fn shvv_error_bound(n: f64, k: usize, u: f64, h2: f64) -> f64 {
    let lk = (k as f64).log2();
    let lead = n - k as f64 * lk;
    3.0 * lk * (-(lead * lead) / (8.0 * n * lk * u.powi(4) * h2)).exp()
}

/// Arms ordered by gap (best first, ties by index) with their gaps.
fn ranked(gaps: &[f64]) -> Vec<(usize, f64)> {
    let mut r: Vec<(usize, f64)> = gaps.iter().copied().enumerate().collect();
    r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    r
}

/// Regret bound of a regret-minimisation theorem at horizon `n`.
pub fn regret_bound(theorem: Theorem, instance: &BanditInstance, n: f64) -> Result<BoundReport> {
    let reg = instance.regularizer();
    let objective = match theorem {
        Theorem::T1 => Objective::Variance,
        Theorem::T3 => Objective::SrLike,
        Theorem::T5 => Objective::Rssr,
        _ => {
            return Err(Error::Usage(format!(
                "{theorem} is an error-probability bound"
            )))
        }
    };
    let gaps = instance.gaps(objective).values;
    let truths = instance.truths();
    let mut terms = vec![0.0; gaps.len()];
    let raw = match theorem {
        Theorem::T1 => {
            let mut total = 0.0;
            for (i, &d) in gaps.iter().enumerate() {
                if d > 0.0 {
                    terms[i] = variance_pull_bound(d, n);
                    total += d * terms[i];
                }
            }
            total
        }
        _ => {
            let mut max_sum = 0.0;
            let mut gap_sum = 0.0;
            for (i, &d) in gaps.iter().enumerate() {
                if d > 0.0 {
                    let m = sharpe_pull_term(d, &truths[i], reg, n);
                    terms[i] = m + TAIL;
                    max_sum += m;
                    gap_sum += d;
                }
            }
            max_sum + TAIL * gap_sum
        }
    };
    Ok(BoundReport::new(theorem, terms, raw))
}

/// Error-probability bound of a best-arm identification theorem at budget
/// `n`.
pub fn error_bound(
    theorem: Theorem,
    instance: &BanditInstance,
    n: u64,
    surlog: SurLog,
) -> Result<BoundReport> {
    let k = instance.k();
    let reg = instance.regularizer();
    let truths = instance.truths();
    let nf = n as f64;
    let lk = (k as f64).log2();
    match theorem {
        Theorem::T6 => {
            let gaps = instance.gaps(Objective::Variance).values;
            let h2 = hardness_h2(&gaps);
            let u = instance.support().1;
            let raw = if h2.is_finite() {
                shvv_error_bound(nf, k, u, h2)
            } else {
                f64::INFINITY
            };
            Ok(BoundReport::new(theorem, vec![h2], raw))
        }
        Theorem::T7 => {
            let order = ranked(&instance.gaps(Objective::Rssr).values);
            let best = &truths[order[0].0];
            let mut terms = Vec::new();
            for phase in 1..=sh_phases(k) {
                let ik = k as f64 / 2f64.powi(phase as i32 + 2);
                let rank = (ik.ceil() as usize).max(2).min(k);
                let (arm, delta) = order[rank - 1];
                let term = if delta > 0.0 {
                    let eps = epsilon_threshold(delta, &truths[arm], reg)
                        .min(epsilon_threshold(delta, best, reg));
                    6.0 * (-(eps * eps / ik) * nf / (2.0 * lk)).exp()
                } else {
                    f64::INFINITY
                };
                terms.push(term);
            }
            let raw = terms.iter().sum();
            Ok(BoundReport::new(theorem, terms, raw))
        }
        Theorem::T8 => {
            let order = ranked(&instance.gaps(Objective::Rssr).values);
            let delta2 = order[1].1;
            let schedule = sursr_schedule(n, k, surlog)?;
            let terms: Vec<f64> = if delta2 > 0.0 {
                let eps = truths
                    .iter()
                    .map(|t| epsilon_threshold(delta2, t, reg))
                    .fold(f64::INFINITY, f64::min);
                schedule
                    .iter()
                    .map(|&t| 2.0 * (-2.0 * t as f64 * eps * eps).exp())
                    .collect()
            } else {
                vec![f64::INFINITY; schedule.len()]
            };
            let raw = terms.iter().sum();
            Ok(BoundReport::new(theorem, terms, raw))
        }
        _ => Err(Error::Usage(format!("{theorem} is a regret bound"))),
    }
}

/// Evaluates any theorem; regret theorems read `n` as the horizon.
pub fn bound_overlay(
    theorem: Theorem,
    instance: &BanditInstance,
    n: u64,
    surlog: SurLog,
) -> Result<BoundReport> {
    if theorem.is_probability() {
        error_bound(theorem, instance, n, surlog)
    } else {
        regret_bound(theorem, instance, n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::BoundedDistribution;
    use approx::assert_relative_eq;

    #[test]
    fn variance_pull_bound_values() {
        let expected = 8.0 * 1000f64.ln() / 0.01 + 1.0 + PI * PI / 3.0;
        assert_relative_eq!(variance_pull_bound(0.1, 1000.0), expected, max_relative = 1e-14);
        assert_relative_eq!(variance_pull_bound(0.1, 1000.0), 5530.49, epsilon = 0.01);
        assert_relative_eq!(variance_pull_bound(0.3, 1.0), 1.0 + PI * PI / 3.0);
    }

    #[test]
    fn hardness_of_equal_gaps() {
        let mut gaps = vec![1.0 / 60.0; 16];
        gaps[0] = 0.0;
        assert_relative_eq!(hardness_h2(&gaps), 57600.0, max_relative = 1e-12);
        assert_relative_eq!(hardness_h2(&[0.0, 0.5, 0.1]), 200.0, max_relative = 1e-12);
        assert_eq!(hardness_h2(&[0.0, 0.0, 0.3]), f64::INFINITY);
    }

    #[test]
    fn epsilon_threshold_solves_quadratic() {
        let t = ArmTruth::from_moments(
            crate::env::Moments {
                mean: 0.7,
                variance: 0.05,
                fourth_central: 0.004,
                fourth_raw: 0.0,
            },
            1.0,
        );
        let d = 0.2;
        let e = epsilon_threshold(d, &t, 1.0);
        let w = 1.05;
        let a = (1.5 * d + 1.0) * w + 0.05 + 0.49;
        assert!(e > 0.0);
        assert_relative_eq!(2.0 * e * e + a * e - d * w * w / 2.0, 0.0, epsilon = 1e-14);
        assert_eq!(epsilon_threshold(0.0, &t, 1.0), 0.0);
    }

    #[test]
    fn probability_bounds_clamp() {
        let inst = BanditInstance::new(
            vec![
                BoundedDistribution::uniform(0.0, 1.0),
                BoundedDistribution::uniform(0.0, 1.0),
            ],
            1.0,
        )
        .unwrap();
        for th in [Theorem::T6, Theorem::T7, Theorem::T8] {
            let r = error_bound(th, &inst, 100, SurLog::Logbar).unwrap();
            assert_eq!(r.value, 1.0, "{th}");
            assert!(r.raw >= 1.0);
        }
    }

    #[test]
    fn regret_bound_is_zero_without_gaps_at_horizon_one() {
        let inst = BanditInstance::new(
            vec![
                BoundedDistribution::uniform(1.0, 2.0),
                BoundedDistribution::uniform(1.0, 3.0),
            ],
            1.0,
        )
        .unwrap();
        let r = regret_bound(Theorem::T1, &inst, 1.0).unwrap();
        let gaps = inst.gaps(Objective::Variance).values;
        assert_relative_eq!(r.raw, gaps.iter().sum::<f64>() * (1.0 + PI * PI / 3.0), max_relative = 1e-14);
        let r5 = regret_bound(Theorem::T5, &inst, 1.0).unwrap();
        let g5 = inst.gaps(Objective::Rssr).values;
        assert_relative_eq!(r5.raw, g5.iter().sum::<f64>() * (1.0 + PI * PI / 3.0), max_relative = 1e-14);
        assert!(regret_bound(Theorem::T6, &inst, 1.0).is_err());
    }

    #[test]
    fn theorem_mapping() {
        assert_eq!(Theorem::for_rm(RmPolicyKind::UcbRssr), Some(Theorem::T5));
        assert_eq!(Theorem::for_rm(RmPolicyKind::ModMvts), None);
        assert_eq!(Theorem::for_bai(BaiKind::Sursr), Some(Theorem::T8));
        assert_eq!("t7".parse::<Theorem>().unwrap(), Theorem::T7);
    }
}
