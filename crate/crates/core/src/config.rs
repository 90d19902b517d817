//! JSON experiment configuration: strict parsing, preset merging and
//! resolution into runnable experiments.

use std::path::Path;

use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize};

use crate::bai::{BaiKind, BaiOptions, SurLog};
use crate::env::{BanditInstance, BoundedDistribution, Objective};
use crate::error::{config_err, Error, Result};
use crate::harness::{BaiCell, BaiExperiment, InstanceSource, RandomUniformSpec, RmExperiment};
use crate::presets;
use crate::rm::{pilot_length, RmPolicyKind, DEFAULT_GRA_ALPHA};

pub const DEFAULT_RM_REPLICATIONS: u64 = 1_000;
pub const FULL_RM_REPLICATIONS: u64 = 10_000;
pub const DEFAULT_BAI_REPLICATIONS: u64 = 10_000;
pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rm,
    Bai,
}

/// A single value or a list of values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

// Dispatch on the JSON shape so that errors name the offending field
// instead of "did not match any variant".
impl<'de, T: DeserializeOwned> Deserialize<'de> for OneOrMany<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        match value {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(serde_json::from_value)
                .collect::<std::result::Result<Vec<T>, _>>()
                .map(OneOrMany::Many)
                .map_err(D::Error::custom),
            other => serde_json::from_value(other)
                .map(OneOrMany::One)
                .map_err(D::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Arms(Vec<BoundedDistribution>),
    RandomUniform(RandomUniformSpec),
}

impl InstanceSpec {
    pub fn k(&self) -> usize {
        match self {
            InstanceSpec::Arms(a) => a.len(),
            InstanceSpec::RandomUniform(r) => r.k,
        }
    }
}

/// Contents of a config file; every key is optional so that presets can
/// supply defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<OneOrMany<InstanceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<OneOrMany<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_pilot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds_overlay: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surlog: Option<SurLog>,
    /// Confidence level of the chi-square quantile in GRA-UCB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Objective ranked by the uniform best-arm baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_objective: Option<Objective>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Keys set in `self` win over those in `base`.
    fn over(self, base: ConfigFile) -> ConfigFile {
        ConfigFile {
            mode: self.mode.or(base.mode),
            preset: self.preset.or(base.preset),
            instance: self.instance.or(base.instance),
            policies: self.policies.or(base.policies),
            n: self.n.or(base.n),
            replications: self.replications.or(base.replications),
            seed: self.seed.or(base.seed),
            l: self.l.or(base.l),
            delta_pilot: self.delta_pilot.or(base.delta_pilot),
            output_dir: self.output_dir.or(base.output_dir),
            bounds_overlay: self.bounds_overlay.or(base.bounds_overlay),
            surlog: self.surlog.or(base.surlog),
            alpha: self.alpha.or(base.alpha),
            uniform_objective: self.uniform_objective.or(base.uniform_objective),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub output_dir: Option<String>,
    /// Raises the default regret-minimisation replication count.
    pub full_fidelity: bool,
}

/// Fully specified configuration, echoed into the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub preset: Option<String>,
    pub instances: Vec<InstanceSpec>,
    pub policies: Vec<String>,
    pub n: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    #[serde(rename = "L")]
    pub l: f64,
    pub delta_pilot: Option<f64>,
    pub output_dir: String,
    pub bounds_overlay: bool,
    pub surlog: SurLog,
    pub alpha: f64,
    pub uniform_objective: Objective,
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
}

/// Merges a config file, a preset and command-line overrides.
///
/// The preset may come from `--preset` or from the file's `preset` key; a
/// file may not name a preset and also define `instance`.
pub fn resolve(file: Option<ConfigFile>, preset: Option<&str>, ov: &Overrides) -> Result<ResolvedConfig> {
    let file = file.unwrap_or_default();
    let preset_name = preset.map(str::to_string).or_else(|| file.preset.clone());
    if preset_name.is_some() && file.instance.is_some() {
        return config_err("'preset' and 'instance' are mutually exclusive");
    }
    let merged = match &preset_name {
        Some(name) => {
            let p = presets::find(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset '{name}' (known: {})",
                    presets::names().join(", ")
                ))
            })?;
            let mut own = file;
            own.preset = Some(name.clone());
            own.over(p.config)
        }
        None => file,
    };

    let mode = required(merged.mode, "mode")?;
    let instances = required(merged.instance, "instance")?.into_vec();
    let policies = required(merged.policies, "policies")?;
    let n = required(merged.n, "n")?.into_vec();
    let l = required(merged.l, "L")?;
    let default_reps = match mode {
        Mode::Rm if ov.full_fidelity => FULL_RM_REPLICATIONS,
        Mode::Rm => DEFAULT_RM_REPLICATIONS,
        Mode::Bai => DEFAULT_BAI_REPLICATIONS,
    };
    let resolved = ResolvedConfig {
        mode,
        preset: merged.preset,
        instances,
        policies,
        n,
        replications: ov.replications.or(merged.replications).unwrap_or(default_reps),
        seed: ov.seed.or(merged.seed).unwrap_or(0),
        l,
        delta_pilot: merged.delta_pilot,
        output_dir: ov
            .output_dir
            .clone()
            .or(merged.output_dir)
            .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.to_string()),
        bounds_overlay: merged.bounds_overlay.unwrap_or(false),
        surlog: merged.surlog.unwrap_or_default(),
        alpha: merged.alpha.unwrap_or(DEFAULT_GRA_ALPHA),
        uniform_objective: merged.uniform_objective.unwrap_or(Objective::Rssr),
    };
    resolved.check()?;
    Ok(resolved)
}

pub enum Experiment {
    Rm(RmExperiment),
    Bai(BaiExperiment),
}

impl ResolvedConfig {
    /// Structural checks that do not need to build distributions.
    pub fn check(&self) -> Result<()> {
        if !(self.l.is_finite() && self.l > 0.0) {
            return config_err(format!("L must be finite and > 0, got {}", self.l));
        }
        if self.replications == 0 {
            return config_err("replications must be >= 1");
        }
        if self.instances.is_empty() {
            return config_err("'instance' must not be empty");
        }
        if self.policies.is_empty() {
            return config_err("'policies' must not be empty");
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return config_err("'n' must be a positive integer or a non-empty list of them");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return config_err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(d) = self.delta_pilot {
            if !(0.0..=1.0).contains(&d) {
                return config_err(format!("delta_pilot must lie in [0, 1], got {d}"));
            }
        }
        match self.mode {
            Mode::Rm => {
                for p in &self.policies {
                    p.parse::<RmPolicyKind>()?;
                }
                if self.instances.len() != 1 || self.n.len() != 1 {
                    return config_err("mode 'rm' takes exactly one instance and one horizon n");
                }
                if matches!(self.instances[0], InstanceSpec::RandomUniform(_)) {
                    return config_err("mode 'rm' needs explicit 'arms'");
                }
            }
            Mode::Bai => {
                for p in &self.policies {
                    p.parse::<BaiKind>()?;
                }
                if self.n.len() != 1 && self.n.len() != self.instances.len() {
                    return config_err(format!(
                        "'n' lists {} budgets for {} instances",
                        self.n.len(),
                        self.instances.len()
                    ));
                }
                if self.replications > u32::MAX as u64 {
                    return config_err("replications must fit in 32 bits");
                }
            }
        }
        for spec in &self.instances {
            match spec {
                InstanceSpec::Arms(arms) => {
                    if arms.len() < 2 {
                        return config_err(format!("instance needs K >= 2 arms, got {}", arms.len()));
                    }
                    for a in arms {
                        a.validate()?;
                    }
                }
                InstanceSpec::RandomUniform(r) => r.validate()?,
            }
        }
        Ok(())
    }

    /// Builds instances and policies; distribution moments are computed here.
    pub fn build(&self, workers: usize) -> Result<Experiment> {
        self.check()?;
        match self.mode {
            Mode::Rm => {
                let InstanceSpec::Arms(arms) = &self.instances[0] else {
                    return config_err("mode 'rm' needs explicit 'arms'");
                };
                let instance = BanditInstance::new(arms.clone(), self.l)?;
                instance.validate_for_regret()?;
                let horizon = self.n[0];
                let pilot_len = pilot_length(horizon, instance.k(), self.delta_pilot)?;
                Ok(Experiment::Rm(RmExperiment {
                    instance,
                    policies: self
                        .policies
                        .iter()
                        .map(|p| p.parse())
                        .collect::<Result<_>>()?,
                    horizon,
                    replications: self.replications,
                    seed: self.seed,
                    pilot_len,
                    gra_alpha: self.alpha,
                    bounds_overlay: self.bounds_overlay,
                    workers,
                    checkpoints: None,
                }))
            }
            Mode::Bai => {
                let cells = self
                    .instances
                    .iter()
                    .enumerate()
                    .map(|(i, spec)| {
                        let budget = if self.n.len() == 1 { self.n[0] } else { self.n[i] };
                        let source = match spec {
                            InstanceSpec::Arms(arms) => {
                                InstanceSource::Fixed(BanditInstance::new(arms.clone(), self.l)?)
                            }
                            InstanceSpec::RandomUniform(r) => InstanceSource::Random {
                                spec: r.clone(),
                                regularizer: self.l,
                            },
                        };
                        Ok(BaiCell { source, budget })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let policies: Vec<BaiKind> = self
                    .policies
                    .iter()
                    .map(|p| p.parse())
                    .collect::<Result<_>>()?;
                let options = BaiOptions {
                    surlog: self.surlog,
                    uniform_objective: self.uniform_objective,
                };
                // surface schedule errors before any replication runs
                for cell in &cells {
                    for &kind in &policies {
                        check_schedule(kind, cell.source.k(), cell.budget, &options)?;
                    }
                }
                Ok(Experiment::Bai(BaiExperiment {
                    cells,
                    policies,
                    replications: self.replications,
                    seed: self.seed,
                    options,
                    bounds_overlay: self.bounds_overlay,
                    workers,
                }))
            }
        }
    }
}

fn check_schedule(kind: BaiKind, k: usize, n: u64, opts: &BaiOptions) -> Result<()> {
    match kind {
        BaiKind::Shvv | BaiKind::Shsr => crate::bai::sh_schedule(n, k).map(drop),
        BaiKind::Sursr => crate::bai::sursr_schedule(n, k, opts.surlog).map(drop),
        BaiKind::Uniform if n < 2 * k as u64 => {
            config_err(format!("uniform allocation needs n >= 2K = {}, got {n}", 2 * k))
        }
        BaiKind::Uniform => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{
        "mode": "rm",
        "instance": {"arms": [
            {"kind": "uniform", "params": {"lower": 1.0, "upper": 2.0}},
            {"kind": "uniform", "params": {"lower": 1.0, "upper": 3.0}}
        ]},
        "policies": ["ucb-rssr"],
        "n": 100,
        "L": 1.0
    }"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let r = resolve(Some(ConfigFile::from_json(MINIMAL).unwrap()), None, &Overrides::default()).unwrap();
        assert_eq!(r.replications, DEFAULT_RM_REPLICATIONS);
        assert_eq!(r.seed, 0);
        assert_eq!(r.surlog, SurLog::Logbar);
        assert!(matches!(r.build(1).unwrap(), Experiment::Rm(_)));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("\"n\": 100", "\"n\": 100, \"horizon\": 5");
        let err = ConfigFile::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL.replace(",\n        \"L\": 1.0", "");
        let err = resolve(Some(ConfigFile::from_json(&text).unwrap()), None, &Overrides::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("'L'"), "{err}");
    }

    #[test]
    fn zero_regularizer_is_rejected() {
        let text = MINIMAL.replace("\"L\": 1.0", "\"L\": 0");
        let err = resolve(Some(ConfigFile::from_json(&text).unwrap()), None, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("L must be"), "{err}");
    }

    #[test]
    fn preset_and_instance_conflict() {
        let mut file = ConfigFile::from_json(MINIMAL).unwrap();
        file.preset = Some("rm-uniform-k5".into());
        assert!(resolve(Some(file.clone()), None, &Overrides::default()).is_err());
        file.preset = None;
        assert!(resolve(Some(file), Some("rm-uniform-k5"), &Overrides::default()).is_err());
    }

    #[test]
    fn overrides_win() {
        let file = ConfigFile {
            seed: Some(3),
            replications: Some(7),
            ..Default::default()
        };
        let ov = Overrides {
            seed: Some(42),
            ..Default::default()
        };
        let r = resolve(Some(file), Some("bai-shvv-exp1"), &ov).unwrap();
        assert_eq!((r.seed, r.replications), (42, 7));
        assert_eq!(r.preset.as_deref(), Some("bai-shvv-exp1"));
        let r = resolve(None, Some("rm-uniform-k5"), &Overrides { full_fidelity: true, ..Default::default() }).unwrap();
        assert_eq!(r.replications, FULL_RM_REPLICATIONS);
    }

    #[test]
    fn bad_budget_list_length() {
        let file = ConfigFile {
            n: Some(OneOrMany::Many(vec![1000, 2000])),
            ..Default::default()
        };
        assert!(resolve(Some(file), Some("bai-sr-exp1"), &Overrides::default()).is_err());
    }

    #[test]
    fn tiny_bai_budget_is_config_error() {
        let file = ConfigFile {
            n: Some(OneOrMany::One(10)),
            ..Default::default()
        };
        let r = resolve(Some(file), Some("bai-sr-exp1"), &Overrides::default()).unwrap();
        assert!(matches!(r.build(1), Err(Error::Config(_))));
    }

    #[test]
    fn resolved_config_round_trips() {
        let r = resolve(None, Some("bai-sr-exp2"), &Overrides::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ResolvedConfig>(&text).unwrap(), r);
    }

    fn arb_config() -> impl Strategy<Value = ConfigFile> {
        let arm = (0.0f64..5.0, 0.01f64..5.0).prop_map(|(l, w)| BoundedDistribution::uniform(l, l + w));
        (
            prop::option::of(prop_oneof![Just(Mode::Rm), Just(Mode::Bai)]),
            prop::option::of(prop::collection::vec(arm, 2..5)),
            prop::option::of(prop::collection::vec(1u64..100_000, 1..4)),
            prop::option::of(any::<u64>()),
            prop::option::of(0.01f64..10.0),
            prop::option::of(prop_oneof![Just(SurLog::Logbar), Just(SurLog::Log2), Just(SurLog::Ln)]),
            prop::option::of(any::<bool>()),
        )
            .prop_map(|(mode, arms, n, seed, l, surlog, overlay)| ConfigFile {
                mode,
                instance: arms.map(|a| OneOrMany::One(InstanceSpec::Arms(a))),
                n: n.map(|mut v| if v.len() == 1 { OneOrMany::One(v.pop().unwrap()) } else { OneOrMany::Many(v) }),
                seed,
                l,
                surlog,
                bounds_overlay: overlay,
                policies: Some(vec!["ucb-rssr".into()]),
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn config_file_round_trips(cfg in arb_config()) {
            let text = cfg.to_json();
            prop_assert_eq!(ConfigFile::from_json(&text).unwrap(), cfg);
        }
    }
}
