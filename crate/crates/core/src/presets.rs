//! Named experiment configurations.
//!
//! Presets described by target RSSR values synthesize uniform arms: for a
//! variance `v` and target `g`, the mean `sqrt(g (L + v))` gives exactly
//! `mean^2 / (L + v) = g`, and the support is `mean +/- sqrt(3 v)`.

use crate::config::{ConfigFile, InstanceSpec, Mode, OneOrMany};
use crate::env::BoundedDistribution;
use crate::harness::RandomUniformSpec;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ConfigFile,
}

const KS: [usize; 3] = [16, 32, 64];

const MEANS_K10: [f64; 10] = [3.80, 4.43, 5.09, 4.15, 5.33, 3.69, 5.02, 3.38, 3.91, 3.51];
const VARS_K10: [f64; 10] = [2.7, 4.17, 6.01, 3.7, 6.99, 2.83, 6.21, 2.39, 3.64, 2.78];

/// Smallest variance used when an arithmetic progression would turn
/// non-positive.
pub const MIN_PROGRESSION_VARIANCE: f64 = 1e-3;
/// Smallest target RSSR used when an arithmetic progression would turn
/// non-positive.
pub const MIN_PROGRESSION_RSSR: f64 = 1e-2;

/// Uniform arm with the given mean and variance.
pub fn uniform_arm(mean: f64, var: f64) -> BoundedDistribution {
    BoundedDistribution::uniform_from_moments(mean, var)
}

/// Uniform arm whose RSSR under `reg` equals `target`.
pub fn uniform_with_rssr(target: f64, var: f64, reg: f64) -> BoundedDistribution {
    uniform_arm((target * (reg + var)).sqrt(), var)
}

/// Uniform arm centred at 1/2 with variance `var`.
fn centred(var: f64) -> BoundedDistribution {
    uniform_arm(0.5, var)
}

fn arms(list: Vec<BoundedDistribution>) -> InstanceSpec {
    InstanceSpec::Arms(list)
}

fn rm(instance: Vec<BoundedDistribution>, reg: f64) -> ConfigFile {
    ConfigFile {
        mode: Some(Mode::Rm),
        instance: Some(OneOrMany::One(arms(instance))),
        policies: Some(vec!["ucb-rssr".into(), "mod-gra-ucb".into(), "mod-mvts".into()]),
        n: Some(OneOrMany::One(10_000)),
        l: Some(reg),
        bounds_overlay: Some(true),
        ..ConfigFile::default()
    }
}

fn uniform_set(k: usize) -> Vec<BoundedDistribution> {
    (0..k).map(|i| uniform_arm(MEANS_K10[i], VARS_K10[i])).collect()
}

/// Best arm at RSSR 4, all others at 3.5, on the same variances as the
/// K=5/10 sets.
fn gap_half_set(k: usize, reg: f64) -> Vec<BoundedDistribution> {
    (0..k)
        .map(|i| uniform_with_rssr(if i == 0 { 4.0 } else { 3.5 }, VARS_K10[i], reg))
        .collect()
}

fn bai_grid(per_k: impl Fn(usize) -> InstanceSpec) -> Option<OneOrMany<InstanceSpec>> {
    Some(OneOrMany::Many(KS.iter().map(|&k| per_k(k)).collect()))
}

fn shvv(per_k: impl Fn(usize) -> InstanceSpec) -> ConfigFile {
    ConfigFile {
        mode: Some(Mode::Bai),
        instance: bai_grid(per_k),
        policies: Some(vec!["shvv".into()]),
        n: Some(OneOrMany::One(5000)),
        l: Some(1.0),
        bounds_overlay: Some(true),
        ..ConfigFile::default()
    }
}

/// Best arm uniform on [0, 1]; arm `i` (1-based, `i >= 2`) has variance
/// `var(i, K)`.
fn shvv_arms(var: impl Fn(usize, usize) -> f64) -> impl Fn(usize) -> InstanceSpec {
    move |k| {
        let mut list = vec![BoundedDistribution::uniform(0.0, 1.0)];
        list.extend((2..=k).map(|i| centred(var(i, k))));
        arms(list)
    }
}

const SR_REG: f64 = 1.0;
const SR_VAR: f64 = 1.0 / 12.0;
const SR_BUDGET: u64 = 20_000;

fn sr(per_k: impl Fn(usize) -> InstanceSpec, budgets: OneOrMany<u64>) -> ConfigFile {
    ConfigFile {
        mode: Some(Mode::Bai),
        instance: bai_grid(per_k),
        policies: Some(vec!["shsr".into(), "sursr".into(), "uniform".into()]),
        n: Some(budgets),
        l: Some(SR_REG),
        bounds_overlay: Some(true),
        ..ConfigFile::default()
    }
}

/// Variance `1/12`, reduced to `g / (3 - g)` for small targets so that the
/// support stays non-negative (with `L = 1` the lower end then sits just
/// above 0).
fn sr_variance(g: f64) -> f64 {
    SR_VAR.min(g / (3.0 - g) * (1.0 - 1e-9))
}

/// Best arm at RSSR 1; arm `i` (1-based, `i >= 2`) at `target(i, K)`.
fn sr_arms(target: impl Fn(usize, usize) -> f64) -> impl Fn(usize) -> InstanceSpec {
    move |k| {
        let list = (1..=k)
            .map(|i| {
                let g = if i == 1 { 1.0 } else { target(i, k) };
                uniform_with_rssr(g, sr_variance(g), SR_REG)
            })
            .collect();
        arms(list)
    }
}

fn random(k: usize) -> InstanceSpec {
    InstanceSpec::RandomUniform(RandomUniformSpec {
        k,
        low: 0.0,
        high: 1.0,
    })
}

/// Split point of the two-group experiments: arms `2..=split` form the
/// first group.
fn two_group_split(k: usize) -> usize {
    match k {
        16 => 6,
        32 => 14,
        _ => 30,
    }
}

pub fn all() -> Vec<Preset> {
    let p = |name, description, config| Preset {
        name,
        description,
        config,
    };
    vec![
        p(
            "rm-uniform-k2-tight",
            "two uniform arms, means [7, 7.075], variances [14.083, 14.97], L=1",
            rm(vec![uniform_arm(7.0, 14.083), uniform_arm(7.075, 14.97)], 1.0),
        ),
        p(
            "rm-uniform-k2-wide",
            "two uniform arms, means [4.5, 4.7], variances [3, 3.2], L=0.5",
            rm(vec![uniform_arm(4.5, 3.0), uniform_arm(4.7, 3.2)], 0.5),
        ),
        p("rm-uniform-k5", "five uniform arms from the ten-arm set, L=1", rm(uniform_set(5), 1.0)),
        p("rm-uniform-k10", "ten uniform arms, L=1", rm(uniform_set(10), 1.0)),
        p(
            "rm-uniform-k5-gap05",
            "five uniform arms with RSSR gaps of 0.5, L=1",
            rm(gap_half_set(5, 1.0), 1.0),
        ),
        p(
            "rm-uniform-k10-gap05",
            "ten uniform arms with RSSR gaps of 0.5, L=1",
            rm(gap_half_set(10, 1.0), 1.0),
        ),
        p(
            "rm-tnormal-setA",
            "N(5, 4) and N(5.5, 6.25) truncated to [1, 7], L=0.5",
            rm(
                vec![
                    BoundedDistribution::truncated_normal(5.0, 4.0, 1.0, 7.0),
                    BoundedDistribution::truncated_normal(5.5, 6.25, 1.0, 7.0),
                ],
                0.5,
            ),
        ),
        p(
            "rm-tnormal-setB",
            "N(10, 12) and N(10.5, 13.25) truncated to [1, 20], L=1",
            rm(
                vec![
                    BoundedDistribution::truncated_normal(10.0, 12.0, 1.0, 20.0),
                    BoundedDistribution::truncated_normal(10.5, 13.25, 1.0, 20.0),
                ],
                1.0,
            ),
        ),
        p(
            "rm-tgamma-setA",
            "Gamma(2, 2) and Gamma(2, 3) (shape, scale) truncated to [1, 10], L=0.5",
            rm(
                vec![
                    BoundedDistribution::truncated_gamma(2.0, 2.0, 1.0, 10.0),
                    BoundedDistribution::truncated_gamma(2.0, 3.0, 1.0, 10.0),
                ],
                0.5,
            ),
        ),
        p(
            "rm-tgamma-setB",
            "Gamma(2, 2) and Gamma(2, 3) (shape, scale) truncated to [1, 10], L=1",
            rm(
                vec![
                    BoundedDistribution::truncated_gamma(2.0, 2.0, 1.0, 10.0),
                    BoundedDistribution::truncated_gamma(2.0, 3.0, 1.0, 10.0),
                ],
                1.0,
            ),
        ),
        p(
            "bai-shvv-exp1",
            "SHVV, one sub-optimal group at variance 1/15, n=5000",
            shvv(shvv_arms(|_, _| 1.0 / 15.0)),
        ),
        p(
            "bai-shvv-exp2",
            "SHVV, sub-optimal groups at variances 1/14 and 1/17, n=5000",
            shvv(shvv_arms(|i, k| if i <= two_group_split(k) { 1.0 / 14.0 } else { 1.0 / 17.0 })),
        ),
        p(
            "bai-shvv-exp3",
            "SHVV, variances 1/13 - 0.0021 (i - 2), n=5000",
            shvv(shvv_arms(|i, _| {
                (1.0 / 13.0 - 0.0021 * (i as f64 - 2.0)).max(MIN_PROGRESSION_VARIANCE)
            })),
        ),
        p(
            "bai-shvv-exp4",
            "SHVV, variances (1/12) 0.98^i, n=5000",
            shvv(shvv_arms(|i, _| 0.98f64.powi(i as i32) / 12.0)),
        ),
        p(
            "bai-shvv-exp5",
            "SHVV, arms uniform on random [l, u] within [0, 1] per replication, n=5000",
            shvv(random),
        ),
        p(
            "bai-sr-exp1",
            "SHSR/SuRSR/uniform, one sub-optimal group at RSSR 0.9, n=20000",
            sr(sr_arms(|_, _| 0.9), OneOrMany::One(SR_BUDGET)),
        ),
        p(
            "bai-sr-exp2",
            "SHSR/SuRSR/uniform, sub-optimal groups at RSSR 0.925 and 0.875, n=20000",
            sr(
                sr_arms(|i, k| {
                    if i <= two_group_split(k) {
                        if k == 64 {
                            0.9254
                        } else {
                            0.925
                        }
                    } else {
                        0.875
                    }
                }),
                OneOrMany::One(SR_BUDGET),
            ),
        ),
        p(
            "bai-sr-exp3",
            "SHSR/SuRSR/uniform, RSSR 1 - (i - 1)/30, n=20000",
            sr(
                sr_arms(|i, _| (1.0 - (i as f64 - 1.0) / 30.0).max(MIN_PROGRESSION_RSSR)),
                OneOrMany::One(SR_BUDGET),
            ),
        ),
        p(
            "bai-sr-exp4",
            "SHSR/SuRSR/uniform, RSSR 0.98^i, n=20000",
            sr(sr_arms(|i, _| 0.98f64.powi(i as i32)), OneOrMany::One(SR_BUDGET)),
        ),
        p(
            "bai-sr-exp5",
            "SHSR/SuRSR/uniform, RSSR 0.98^i, budget 1e4/2e4/3e4 growing with K",
            sr(
                sr_arms(|i, _| 0.98f64.powi(i as i32)),
                OneOrMany::Many(vec![10_000, 20_000, 30_000]),
            ),
        ),
        p(
            "bai-sr-exp6",
            "SHSR/SuRSR/uniform, arms uniform on random [l, u] within [0, 1] per replication, n=20000",
            sr(random, OneOrMany::One(SR_BUDGET)),
        ),
    ]
    .into_iter()
    .map(|mut preset| {
        preset.config.preset = Some(preset.name.to_string());
        preset
    })
    .collect()
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|p| p.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, Experiment};
    use crate::env::{BanditInstance, Objective};
    use approx::assert_relative_eq;

    #[test]
    fn catalog_is_large_and_unique() {
        let names = names();
        assert!(names.len() >= 15);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn every_preset_resolves() {
        for p in all() {
            let resolved = resolve(None, Some(p.name), &Default::default())
                .unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let exp = resolved.build(1).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            match exp {
                Experiment::Rm(e) => {
                    assert!(e.instance.regularizer() > 0.0);
                    e.instance.validate_for_regret().unwrap();
                    for g in e.instance.gaps(Objective::Rssr).values {
                        assert!(g >= 0.0);
                    }
                }
                Experiment::Bai(e) => assert_eq!(e.cells.len(), 3),
            }
        }
    }

    #[test]
    fn rssr_back_solve_hits_target() {
        for (g, v, l) in [(1.0, 1.0 / 12.0, 1.0), (0.9254, 1.0 / 12.0, 1.0), (3.5, 6.99, 1.0)] {
            let arm = uniform_with_rssr(g, v, l);
            let t = arm.true_moments(l).unwrap();
            assert_relative_eq!(t.rssr, g, max_relative = 1e-12);
            assert_relative_eq!(t.variance, v, max_relative = 1e-12);
        }
    }

    #[test]
    fn small_rssr_targets_stay_non_negative() {
        for g in [MIN_PROGRESSION_RSSR, 0.1, 0.2, 0.5, 1.0] {
            let arm = uniform_with_rssr(g, sr_variance(g), SR_REG);
            arm.validate().unwrap();
            assert_relative_eq!(arm.true_moments(SR_REG).unwrap().rssr, g, max_relative = 1e-12);
        }
    }

    #[test]
    fn shvv_exp1_gap_structure() {
        let spec = shvv_arms(|_, _| 1.0 / 15.0)(16);
        let InstanceSpec::Arms(list) = spec else { panic!() };
        let inst = BanditInstance::new(list, 1.0).unwrap();
        let gaps = inst.gaps(Objective::Variance);
        assert_eq!(gaps.optimal, 0);
        for g in &gaps.values[1..] {
            assert_relative_eq!(*g, 1.0 / 60.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn gap_half_presets_have_half_gaps() {
        let inst = BanditInstance::new(gap_half_set(10, 1.0), 1.0).unwrap();
        let gaps = inst.gaps(Objective::Rssr);
        assert_eq!(gaps.optimal, 0);
        for g in &gaps.values[1..] {
            assert_relative_eq!(*g, 0.5, max_relative = 1e-9);
        }
    }
}
