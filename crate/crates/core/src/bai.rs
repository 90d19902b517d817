//! Fixed-budget best-arm identification: sequential halving on variance or
//! RSSR, successive rejects on RSSR, and a uniform-allocation baseline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{BanditInstance, Objective};
use crate::error::{config_err, Error, Result};
use crate::estimators::{estimates, StreamingMoments};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaiKind {
    Shvv,
    Shsr,
    Sursr,
    Uniform,
}

impl BaiKind {
    pub const ALL: [BaiKind; 4] = [BaiKind::Shvv, BaiKind::Shsr, BaiKind::Sursr, BaiKind::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            BaiKind::Shvv => "shvv",
            BaiKind::Shsr => "shsr",
            BaiKind::Sursr => "sursr",
            BaiKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for BaiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown best-arm policy '{s}'")))
    }
}

/// Normaliser used in the successive-rejects schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurLog {
    /// `1/2 + sum_{i=2..K} 1/i`
    #[default]
    Logbar,
    Log2,
    Ln,
}

impl SurLog {
    pub fn eval(self, k: usize) -> f64 {
        let k_f = k as f64;
        match self {
            SurLog::Logbar => 0.5 + (2..=k).map(|i| 1.0 / i as f64).sum::<f64>(),
            SurLog::Log2 => k_f.log2(),
            SurLog::Ln => k_f.ln(),
        }
    }
}

/// Number of halving rounds, `ceil(log2 K)`.
pub fn sh_phases(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

/// Per-arm pulls in a halving phase with `active` surviving arms:
/// `floor(n / (|A_k| ceil(log2 K)))`.
pub fn sh_phase_budget(n: u64, active: usize, k: usize) -> Result<u64> {
    if k < 2 || active < 1 || active > k {
        return config_err(format!("invalid halving phase: |A_k|={active}, K={k}"));
    }
    let t = n / (active as u64 * sh_phases(k) as u64);
    if t == 0 {
        return config_err(format!(
            "budget n={n} too small for one pull per arm in a phase with {active} of K={k} arms"
        ));
    }
    Ok(t)
}

/// Per-arm pulls for every halving phase; any budget left by flooring is
/// spread over the arms of the final phase.
pub fn sh_schedule(n: u64, k: usize) -> Result<Vec<u64>> {
    let mut active = k;
    let mut out = Vec::new();
    let mut used = 0;
    for _ in 0..sh_phases(k) {
        let t = sh_phase_budget(n, active, k)?;
        used += t * active as u64;
        out.push(t);
        active = active.div_ceil(2);
    }
    let last_active = sizes_halving(k).last().copied().unwrap_or(k) as u64;
    if let Some(last) = out.last_mut() {
        *last += (n - used) / last_active;
    }
    Ok(out)
}

fn sizes_halving(k: usize) -> Vec<usize> {
    let mut active = k;
    (0..sh_phases(k))
        .map(|_| {
            let a = active;
            active = active.div_ceil(2);
            a
        })
        .collect()
}

/// Cumulative per-arm pulls after successive-rejects phase `phase`
/// (1-based): `ceil((n - K) / (logK * (K + 1 - phase)))`.
pub fn sursr_phase_budget(n: u64, k: usize, phase: usize, surlog: SurLog) -> Result<u64> {
    if k < 2 {
        return config_err(format!("successive rejects needs K >= 2, got {k}"));
    }
    if n <= k as u64 {
        return config_err(format!("successive rejects needs n > K, got n={n}, K={k}"));
    }
    if phase == 0 || phase >= k {
        return config_err(format!("phase {phase} outside 1..={}", k - 1));
    }
    let denom = surlog.eval(k) * (k + 1 - phase) as f64;
    Ok(((n - k as u64) as f64 / denom).ceil() as u64)
}

/// Cumulative schedule `t_1..t_{K-1}`, checked against the budget.
pub fn sursr_schedule(n: u64, k: usize, surlog: SurLog) -> Result<Vec<u64>> {
    let ts = (1..k)
        .map(|p| sursr_phase_budget(n, k, p, surlog))
        .collect::<Result<Vec<_>>>()?;
    let mut prev = 0;
    let mut total = 0;
    for (i, &t) in ts.iter().enumerate() {
        total += (k - i) as u64 * (t - prev);
        prev = t;
    }
    if total > n {
        return config_err(format!(
            "successive-rejects schedule with surlog={surlog:?} needs {total} pulls, more than n={n}"
        ));
    }
    Ok(ts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaiOptions {
    pub surlog: SurLog,
    /// Objective ranked by the uniform baseline.
    pub uniform_objective: Objective,
}

impl Default for BaiOptions {
    fn default() -> Self {
        Self {
            surlog: SurLog::Logbar,
            uniform_objective: Objective::Rssr,
        }
    }
}

/// Objective a policy tries to maximise, and against which its error is
/// scored.
pub fn objective_for(kind: BaiKind, opts: &BaiOptions) -> Objective {
    match kind {
        BaiKind::Shvv => Objective::Variance,
        BaiKind::Shsr | BaiKind::Sursr => Objective::Rssr,
        BaiKind::Uniform => opts.uniform_objective,
    }
}

/// Completed run of one best-arm identification policy.
#[derive(Clone, Debug, PartialEq)]
pub struct BaiRun {
    pub kind: BaiKind,
    pub budget: u64,
    pub k: usize,
    pub regularizer: f64,
    /// Active set at the start of each phase, in arm order.
    pub active_sets: Vec<Vec<usize>>,
    pub per_arm: Vec<StreamingMoments>,
    pub recommendation: usize,
}

impl BaiRun {
    pub fn total_pulls(&self) -> u64 {
        self.per_arm.iter().map(|m| m.count()).sum()
    }

    pub fn phases(&self) -> usize {
        self.active_sets.len()
    }
}

fn score(m: &StreamingMoments, objective: Objective, reg: f64) -> f64 {
    match estimates(m, reg) {
        Ok(e) => match objective {
            Objective::Variance => e.variance,
            Objective::SrLike => e.sr_like,
            Objective::Rssr => e.rssr,
        },
        Err(_) => f64::NEG_INFINITY,
    }
}

/// `active` ordered best first; equal scores keep the lower arm index first.
fn rank(active: &[usize], per_arm: &[StreamingMoments], objective: Objective, reg: f64) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = active
        .iter()
        .map(|&i| (i, score(&per_arm[i], objective, reg)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(i, _)| i).collect()
}

fn pull_each(
    instance: &BanditInstance,
    active: &[usize],
    pulls: u64,
    per_arm: &mut [StreamingMoments],
    stream: &mut RandomStream,
) -> Result<()> {
    for &arm in active {
        for _ in 0..pulls {
            per_arm[arm].update(instance.pull(arm, stream)?);
        }
    }
    Ok(())
}

pub fn run_bai(
    kind: BaiKind,
    instance: &BanditInstance,
    n: u64,
    opts: &BaiOptions,
    stream: &mut RandomStream,
) -> Result<BaiRun> {
    let k = instance.k();
    let reg = instance.regularizer();
    let objective = objective_for(kind, opts);
    let mut per_arm = vec![StreamingMoments::new(); k];
    let mut active: Vec<usize> = (0..k).collect();
    let mut active_sets = Vec::new();

    let recommendation = match kind {
        BaiKind::Shvv | BaiKind::Shsr => {
            for t in sh_schedule(n, k)? {
                active_sets.push(active.clone());
                pull_each(instance, &active, t, &mut per_arm, stream)?;
                let keep = active.len().div_ceil(2);
                let mut next = rank(&active, &per_arm, objective, reg);
                next.truncate(keep);
                next.sort_unstable();
                active = next;
            }
            active[0]
        }
        BaiKind::Sursr => {
            let mut prev = 0;
            for t in sursr_schedule(n, k, opts.surlog)? {
                active_sets.push(active.clone());
                pull_each(instance, &active, t - prev, &mut per_arm, stream)?;
                prev = t;
                let mut next = rank(&active, &per_arm, objective, reg);
                next.pop();
                next.sort_unstable();
                active = next;
            }
            active[0]
        }
        BaiKind::Uniform => {
            if n < 2 * k as u64 {
                return config_err(format!(
                    "uniform allocation needs n >= 2K = {}, got {n}",
                    2 * k
                ));
            }
            active_sets.push(active.clone());
            let base = n / k as u64;
            let extra = (n % k as u64) as usize;
            for arm in 0..k {
                let pulls = base + u64::from(arm < extra);
                pull_each(instance, &[arm], pulls, &mut per_arm, stream)?;
            }
            rank(&active, &per_arm, objective, reg)[0]
        }
    };

    Ok(BaiRun {
        kind,
        budget: n,
        k,
        regularizer: reg,
        active_sets,
        per_arm,
        recommendation,
    })
}
