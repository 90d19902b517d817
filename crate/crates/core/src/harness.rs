//! Seeded, replication-parallel Monte Carlo driver.
//!
//! Every replication owns an independent [`RandomStream`] derived from the
//! master seed and the replication index, and partial results are folded in
//! replication order, so output does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bai::{objective_for, run_bai as run_bai_once, BaiKind, BaiOptions};
use crate::bounds::{error_bound, regret_bound, Theorem};
use crate::env::{BanditInstance, BoundedDistribution};
use crate::error::{config_err, Error, Result};
use crate::rm::{RmPolicy, RmPolicyConfig, RmPolicyKind};
use crate::rng::RandomStream;

pub const MAX_CHECKPOINTS: usize = 512;
const CHUNK: usize = 256;

/// `sum_i gap_i * count_i`.
pub fn regret_from_counts(counts: &[u64], gaps: &[f64]) -> f64 {
    counts.iter().zip(gaps).map(|(&c, &g)| c as f64 * g).sum()
}

/// `0` followed by at most [`MAX_CHECKPOINTS`] distinct, roughly
/// log-spaced steps in `1..=n`, always including `n/4`, `n/2` and `n`.
pub fn log_checkpoints(n: u64) -> Vec<u64> {
    let mut pts = vec![0];
    if n == 0 {
        return pts;
    }
    let budget = MAX_CHECKPOINTS - 3;
    let top = (n as f64).ln();
    for i in 0..budget {
        let t = (top * i as f64 / (budget - 1) as f64).exp().round() as u64;
        pts.push(t.clamp(1, n));
    }
    pts.extend([n / 4, n / 2, n].into_iter().filter(|&t| t >= 1));
    pts.sort_unstable();
    pts.dedup();
    pts
}

pub fn default_workers() -> usize {
    std::env::var("RISK_BANDITS_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w: &usize| w >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))
}

/// Sequential mean/variance accumulator over replications.
#[derive(Clone, Debug)]
struct Running {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Running {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    fn stderr(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.n as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RmExperiment {
    pub instance: BanditInstance,
    pub policies: Vec<RmPolicyKind>,
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    pub pilot_len: u64,
    pub gra_alpha: f64,
    pub bounds_overlay: bool,
    pub workers: usize,
    /// Defaults to [`log_checkpoints`].
    pub checkpoints: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub policy: RmPolicyKind,
    pub replications: u64,
    pub timesteps: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean pull count of every arm at each timestep.
    pub mean_pulls: Vec<Vec<f64>>,
    pub bound: Option<Vec<f64>>,
}

impl RegretCurve {
    pub fn at(&self, t: u64) -> Option<usize> {
        self.timesteps.iter().position(|&x| x == t)
    }
}

struct Trace {
    regret: Vec<f64>,
    pulls: Vec<f64>,
}

fn rm_replication(exp: &RmExperiment, kind: RmPolicyKind, gaps: &[f64], checkpoints: &[u64], r: u64) -> Result<Trace> {
    let k = exp.instance.k();
    let mut stream = RandomStream::new(exp.seed, r);
    let mut policy = RmPolicy::new(RmPolicyConfig {
        kind,
        arms: k,
        horizon: exp.horizon,
        pilot_len: exp.pilot_len,
        regularizer: exp.instance.regularizer(),
        gra_alpha: exp.gra_alpha,
        support: Some(exp.instance.support()),
    })?;
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut pulls = Vec::with_capacity(checkpoints.len() * k);
    let mut counts = vec![0u64; k];
    let mut cum = 0.0;
    let mut next = 0;
    for t in 0..=exp.horizon {
        if t > 0 {
            let arm = policy.select_arm(&mut stream)?;
            let x = exp.instance.pull(arm, &mut stream)?;
            policy.observe(arm, x)?;
            counts[arm] += 1;
            cum += gaps[arm];
        }
        while next < checkpoints.len() && checkpoints[next] == t {
            regret.push(cum);
            pulls.extend(counts.iter().map(|&c| c as f64));
            next += 1;
        }
    }
    Ok(Trace { regret, pulls })
}

pub fn run_rm(exp: &RmExperiment) -> Result<Vec<RegretCurve>> {
    if exp.replications == 0 {
        return config_err("replications must be >= 1");
    }
    if exp.pilot_len > exp.horizon {
        return config_err(format!(
            "pilot phase {} exceeds horizon {}",
            exp.pilot_len, exp.horizon
        ));
    }
    exp.instance.validate_for_regret()?;
    let checkpoints = match &exp.checkpoints {
        Some(c) => {
            let mut c = c.clone();
            c.retain(|&t| t <= exp.horizon);
            c.sort_unstable();
            c.dedup();
            c
        }
        None => log_checkpoints(exp.horizon),
    };
    let k = exp.instance.k();
    let pool = pool(exp.workers)?;
    let mut curves = Vec::new();
    for &kind in &exp.policies {
        let gaps = exp.instance.gaps(kind.objective()).values;
        let mut regret = Running::new(checkpoints.len());
        let mut pulls = Running::new(checkpoints.len() * k);
        let mut start = 0;
        while start < exp.replications {
            let end = (start + CHUNK as u64).min(exp.replications);
            let traces: Vec<Result<Trace>> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|r| rm_replication(exp, kind, &gaps, &checkpoints, r))
                    .collect()
            });
            for tr in traces {
                let tr = tr?;
                regret.push(&tr.regret);
                pulls.push(&tr.pulls);
            }
            start = end;
        }
        let bound = match (exp.bounds_overlay, Theorem::for_rm(kind)) {
            (true, Some(th)) => Some(
                checkpoints
                    .iter()
                    .map(|&t| {
                        if t == 0 {
                            Ok(0.0)
                        } else {
                            regret_bound(th, &exp.instance, t as f64).map(|b| b.raw)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        curves.push(RegretCurve {
            policy: kind,
            replications: exp.replications,
            timesteps: checkpoints.clone(),
            stderr: regret.stderr(),
            mean_regret: regret.mean,
            mean_pulls: pulls.mean.chunks(k).map(|c| c.to_vec()).collect(),
            bound,
        });
    }
    Ok(curves)
}

/// Arms redrawn every replication: each arm is uniform on `[l, u]` with
/// `l < u` the sorted pair of two independent uniform draws on
/// `[low, high]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomUniformSpec {
    pub k: usize,
    #[serde(default)]
    pub low: f64,
    #[serde(default = "one")]
    pub high: f64,
}

fn one() -> f64 {
    1.0
}

impl RandomUniformSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return config_err(format!("random_uniform needs k >= 2, got {}", self.k));
        }
        if !(self.low.is_finite() && self.high.is_finite() && 0.0 <= self.low && self.low < self.high) {
            return config_err(format!(
                "random_uniform needs 0 <= low < high, got [{}, {}]",
                self.low, self.high
            ));
        }
        Ok(())
    }

    pub fn draw(&self, reg: f64, stream: &mut RandomStream) -> Result<BanditInstance> {
        let width = self.high - self.low;
        let arms = (0..self.k)
            .map(|_| {
                let (a, b) = loop {
                    let a = self.low + width * stream.uniform();
                    let b = self.low + width * stream.uniform();
                    if a != b {
                        break (a, b);
                    }
                };
                BoundedDistribution::uniform(a.min(b), a.max(b))
            })
            .collect();
        BanditInstance::new(arms, reg)
    }
}

#[derive(Clone, Debug)]
pub enum InstanceSource {
    Fixed(BanditInstance),
    Random { spec: RandomUniformSpec, regularizer: f64 },
}

impl InstanceSource {
    pub fn k(&self) -> usize {
        match self {
            InstanceSource::Fixed(i) => i.k(),
            InstanceSource::Random { spec, .. } => spec.k,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaiCell {
    pub source: InstanceSource,
    pub budget: u64,
}

#[derive(Clone, Debug)]
pub struct BaiExperiment {
    pub cells: Vec<BaiCell>,
    pub policies: Vec<BaiKind>,
    pub replications: u64,
    pub seed: u64,
    pub options: BaiOptions,
    pub bounds_overlay: bool,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub policy: BaiKind,
    pub k: usize,
    pub budget: u64,
    pub replications: u64,
    pub errors: u64,
    pub error_prob: f64,
    pub ci_halfwidth: f64,
    /// Absent for policies without a theorem and for randomised instances.
    pub bound: Option<f64>,
}

pub fn ci_halfwidth(p: f64, replications: u64) -> f64 {
    1.96 * (p * (1.0 - p) / replications as f64).sqrt()
}

/// Stream index of replication `r` in grid cell `cell`.
pub fn bai_stream_index(cell: usize, r: u64) -> u64 {
    ((cell as u64) << 32) | r
}

fn bai_replication(exp: &BaiExperiment, cell_idx: usize, kind: BaiKind, r: u64) -> Result<bool> {
    let cell = &exp.cells[cell_idx];
    let mut stream = RandomStream::new(exp.seed, bai_stream_index(cell_idx, r));
    let drawn;
    let instance = match &cell.source {
        InstanceSource::Fixed(i) => i,
        InstanceSource::Random { spec, regularizer } => {
            drawn = spec.draw(*regularizer, &mut stream)?;
            &drawn
        }
    };
    let run = run_bai_once(kind, instance, cell.budget, &exp.options, &mut stream)?;
    let gaps = instance.gaps(objective_for(kind, &exp.options));
    Ok(!gaps.is_optimal(run.recommendation))
}

pub fn run_bai(exp: &BaiExperiment) -> Result<Vec<ErrorReport>> {
    if exp.replications == 0 {
        return config_err("replications must be >= 1");
    }
    if exp.replications > u32::MAX as u64 {
        return config_err("replications must fit in 32 bits");
    }
    let pool = pool(exp.workers)?;
    let mut out = Vec::new();
    for &kind in &exp.policies {
        for (ci, cell) in exp.cells.iter().enumerate() {
            let outcomes: Vec<Result<bool>> = pool.install(|| {
                (0..exp.replications)
                    .into_par_iter()
                    .map(|r| bai_replication(exp, ci, kind, r))
                    .collect()
            });
            let mut errors = 0u64;
            for o in outcomes {
                errors += u64::from(o?);
            }
            let p = errors as f64 / exp.replications as f64;
            let bound = match (&cell.source, exp.bounds_overlay, Theorem::for_bai(kind)) {
                (InstanceSource::Fixed(inst), true, Some(th)) => {
                    Some(error_bound(th, inst, cell.budget, exp.options.surlog)?.value)
                }
                _ => None,
            };
            out.push(ErrorReport {
                policy: kind,
                k: cell.source.k(),
                budget: cell.budget,
                replications: exp.replications,
                errors,
                error_prob: p,
                ci_halfwidth: ci_halfwidth(p, exp.replications),
                bound,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn regret_dot_product() {
        assert_relative_eq!(regret_from_counts(&[3, 7], &[0.0, 0.114]), 0.798, max_relative = 1e-14);
        assert_eq!(regret_from_counts(&[10, 0], &[0.0, 0.5]), 0.0);
    }

    proptest! {
        #[test]
        fn regret_permutation_invariant(pairs in prop::collection::vec((0u64..10_000, 0.0f64..2.0), 1..12), seed in 0u64..1000) {
            let (c, g): (Vec<u64>, Vec<f64>) = pairs.iter().copied().unzip();
            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            idx.sort_by_key(|&i| (i as u64).wrapping_mul(seed.wrapping_add(7919)) % 101);
            let cp: Vec<u64> = idx.iter().map(|&i| c[i]).collect();
            let gp: Vec<f64> = idx.iter().map(|&i| g[i]).collect();
            let a = regret_from_counts(&c, &g);
            let b = regret_from_counts(&cp, &gp);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn checkpoints_are_bounded_and_sorted() {
        for n in [1u64, 2, 7, 100, 10_000, 1_000_000] {
            let c = log_checkpoints(n);
            assert_eq!(c[0], 0);
            assert_eq!(*c.last().unwrap(), n);
            assert!(c.len() <= MAX_CHECKPOINTS + 1);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
        let c = log_checkpoints(10_000);
        assert!(c.contains(&2500) && c.contains(&5000));
    }

    fn rm_instance() -> BanditInstance {
        BanditInstance::new(
            vec![
                BoundedDistribution::uniform(1.0, 2.0),
                BoundedDistribution::uniform(1.0, 3.0),
                BoundedDistribution::uniform(1.5, 2.5),
            ],
            1.0,
        )
        .unwrap()
    }

    fn rm_exp(workers: usize) -> RmExperiment {
        RmExperiment {
            instance: rm_instance(),
            policies: RmPolicyKind::ALL.to_vec(),
            horizon: 300,
            replications: 40,
            seed: 11,
            pilot_len: 6,
            gra_alpha: 0.05,
            bounds_overlay: true,
            workers,
            checkpoints: None,
        }
    }

    #[test]
    fn regret_curves_are_monotone_and_start_at_zero() {
        let curves = run_rm(&rm_exp(1)).unwrap();
        for c in &curves {
            assert_eq!(c.mean_regret[0], 0.0);
            assert!(c.mean_regret.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            let last = c.mean_pulls.last().unwrap();
            assert_relative_eq!(last.iter().sum::<f64>(), 300.0, max_relative = 1e-12);
            // regret equals the gap-weighted mean pull counts
            let gaps = rm_instance().gaps(c.policy.objective()).values;
            let expected: f64 = last.iter().zip(&gaps).map(|(p, g)| p * g).sum();
            assert_relative_eq!(*c.mean_regret.last().unwrap(), expected, max_relative = 1e-9);
        }
        assert!(curves.iter().filter(|c| c.bound.is_some()).count() == 3);
    }

    #[test]
    fn rm_is_worker_independent() {
        let a = run_rm(&rm_exp(1)).unwrap();
        let b = run_rm(&rm_exp(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pilot_regret_is_exact() {
        // during the pilot every arm is pulled equally, so regret is known
        let mut exp = rm_exp(1);
        exp.policies = vec![RmPolicyKind::UcbRssr];
        exp.checkpoints = Some(vec![0, 6]);
        let c = &run_rm(&exp).unwrap()[0];
        let gaps = rm_instance().gaps(exp.policies[0].objective()).values;
        assert_relative_eq!(c.mean_regret[1], 2.0 * gaps.iter().sum::<f64>(), max_relative = 1e-12);
        assert_eq!(c.stderr[1], 0.0);
    }

    #[test]
    fn infeasible_pilot_is_config_error() {
        let mut exp = rm_exp(1);
        exp.pilot_len = 301;
        assert!(matches!(run_rm(&exp), Err(Error::Config(_))));
    }

    fn point_mass_cell() -> BaiCell {
        BaiCell {
            source: InstanceSource::Fixed(
                BanditInstance::new(
                    vec![
                        BoundedDistribution::uniform(0.9, 0.9),
                        BoundedDistribution::uniform(0.1, 0.1),
                    ],
                    1.0,
                )
                .unwrap(),
            ),
            budget: 20,
        }
    }

    fn bai_exp(workers: usize) -> BaiExperiment {
        BaiExperiment {
            cells: vec![
                point_mass_cell(),
                BaiCell {
                    source: InstanceSource::Random {
                        spec: RandomUniformSpec { k: 8, low: 0.0, high: 1.0 },
                        regularizer: 1.0,
                    },
                    budget: 400,
                },
            ],
            policies: vec![BaiKind::Shsr, BaiKind::Sursr, BaiKind::Uniform],
            replications: 300,
            seed: 5,
            options: BaiOptions::default(),
            bounds_overlay: true,
            workers,
        }
    }

    #[test]
    fn bai_reports_and_determinism() {
        let a = run_bai(&bai_exp(1)).unwrap();
        let b = run_bai(&bai_exp(3)).unwrap();
        assert_eq!(a, b);
        for rep in &a {
            assert!((0.0..=1.0).contains(&rep.error_prob));
            assert_relative_eq!(rep.ci_halfwidth, ci_halfwidth(rep.error_prob, 300));
            if rep.k == 2 {
                assert_eq!(rep.errors, 0);
            } else {
                assert_eq!(rep.bound, None);
            }
        }
    }

    #[test]
    fn identical_arms_give_half_error() {
        let inst = BanditInstance::new(
            vec![
                BoundedDistribution::uniform(0.0, 1.0),
                BoundedDistribution::uniform(0.0, 1.0 - 1e-9),
            ],
            1.0,
        )
        .unwrap();
        let exp = BaiExperiment {
            cells: vec![BaiCell { source: InstanceSource::Fixed(inst), budget: 100 }],
            policies: vec![BaiKind::Shsr],
            replications: 4000,
            seed: 2,
            options: BaiOptions::default(),
            bounds_overlay: false,
            workers: 1,
        };
        let rep = &run_bai(&exp).unwrap()[0];
        assert!((rep.error_prob - 0.5).abs() < 3.0 * rep.ci_halfwidth, "{rep:?}");
    }

    #[test]
    fn random_uniform_draws_valid_arms() {
        let spec = RandomUniformSpec { k: 5, low: 0.0, high: 1.0 };
        let mut s = RandomStream::new(1, 1);
        let inst = spec.draw(1.0, &mut s).unwrap();
        for a in inst.arms() {
            let (l, u) = a.support();
            assert!(0.0 <= l && l < u && u <= 1.0);
        }
        assert!(RandomUniformSpec { k: 1, low: 0.0, high: 1.0 }.validate().is_err());
    }
}
