//! Bounded reward distributions, bandit instances, true moments and
//! objective-specific sub-optimality gaps.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{config_err, Error, Result};
use crate::quadrature::integrate;
use crate::rng::RandomStream;
use crate::special::{gamma_p, gamma_p_inv};

/// Rejection attempts allowed per truncated-gamma sample before giving up.
pub const MAX_REJECTIONS: usize = 1_000_000;

// Below this accepted mass, truncated gamma switches from rejection to
// numerical inverse-CDF sampling.
const REJECTION_MIN_MASS: f64 = 0.1;

const QUAD_REL_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformParams {
    pub lower: f64,
    pub upper: f64,
}

/// Normal law with the given location and variance, truncated to
/// `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedNormalParams {
    pub loc: f64,
    pub var: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Gamma law with shape/scale parameterisation, truncated to `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedGammaParams {
    pub shape: f64,
    pub scale: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-point law: `high` with probability `p`, otherwise `low`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliScaledParams {
    pub low: f64,
    pub high: f64,
    pub p: f64,
}

/// A reward law with bounded support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum BoundedDistribution {
    Uniform(UniformParams),
    TruncatedNormal(TruncatedNormalParams),
    TruncatedGamma(TruncatedGammaParams),
    BernoulliScaled(BernoulliScaledParams),
}

fn finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        config_err(format!("{name}: parameters must be finite"))
    }
}

impl BoundedDistribution {
    pub fn uniform(lower: f64, upper: f64) -> Self {
        Self::Uniform(UniformParams { lower, upper })
    }

    /// Uniform law with the requested mean and variance:
    /// `[mean - sqrt(3 var), mean + sqrt(3 var)]`.
    pub fn uniform_from_moments(mean: f64, var: f64) -> Self {
        let half = (3.0 * var).sqrt();
        Self::uniform(mean - half, mean + half)
    }

    pub fn truncated_normal(loc: f64, var: f64, lower: f64, upper: f64) -> Self {
        Self::TruncatedNormal(TruncatedNormalParams {
            loc,
            var,
            lower,
            upper,
        })
    }

    pub fn truncated_gamma(shape: f64, scale: f64, lower: f64, upper: f64) -> Self {
        Self::TruncatedGamma(TruncatedGammaParams {
            shape,
            scale,
            lower,
            upper,
        })
    }

    pub fn bernoulli_scaled(low: f64, high: f64, p: f64) -> Self {
        Self::BernoulliScaled(BernoulliScaledParams { low, high, p })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Uniform(_) => "uniform",
            Self::TruncatedNormal(_) => "truncated_normal",
            Self::TruncatedGamma(_) => "truncated_gamma",
            Self::BernoulliScaled(_) => "bernoulli_scaled",
        }
    }

    /// Support `[l, u]` of the law.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform(p) => (p.lower, p.upper),
            Self::TruncatedNormal(p) => (p.lower, p.upper),
            Self::TruncatedGamma(p) => (p.lower, p.upper),
            Self::BernoulliScaled(p) => (p.low, p.high),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform(p) => {
                finite("uniform", &[p.lower, p.upper])?;
                if p.lower < 0.0 {
                    return config_err(format!("uniform: lower bound {} must be >= 0", p.lower));
                }
                if p.lower > p.upper {
                    return config_err(format!(
                        "uniform: lower {} exceeds upper {}",
                        p.lower, p.upper
                    ));
                }
            }
            Self::TruncatedNormal(p) => {
                finite("truncated_normal", &[p.loc, p.var, p.lower, p.upper])?;
                if p.var <= 0.0 {
                    return config_err(format!("truncated_normal: variance {} must be > 0", p.var));
                }
                if p.lower < 0.0 || p.lower >= p.upper {
                    return config_err(format!(
                        "truncated_normal: need 0 <= lower < upper, got [{}, {}]",
                        p.lower, p.upper
                    ));
                }
            }
            Self::TruncatedGamma(p) => {
                finite("truncated_gamma", &[p.shape, p.scale, p.lower, p.upper])?;
                if p.shape <= 0.0 || p.scale <= 0.0 {
                    return config_err(format!(
                        "truncated_gamma: shape {} and scale {} must be > 0",
                        p.shape, p.scale
                    ));
                }
                if p.lower < 0.0 || p.lower >= p.upper {
                    return config_err(format!(
                        "truncated_gamma: need 0 <= lower < upper, got [{}, {}]",
                        p.lower, p.upper
                    ));
                }
            }
            Self::BernoulliScaled(p) => {
                finite("bernoulli_scaled", &[p.low, p.high, p.p])?;
                if p.low < 0.0 || p.low > p.high {
                    return config_err(format!(
                        "bernoulli_scaled: need 0 <= low <= high, got [{}, {}]",
                        p.low, p.high
                    ));
                }
                if !(0.0..=1.0).contains(&p.p) {
                    return config_err(format!("bernoulli_scaled: p={} outside [0, 1]", p.p));
                }
            }
        }
        Ok(())
    }

    /// Builds a sampler with per-law constants precomputed.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match self {
            Self::Uniform(p) => Sampler::Uniform {
                lower: p.lower,
                width: p.upper - p.lower,
            },
            Self::BernoulliScaled(p) => Sampler::TwoPoint {
                low: p.low,
                high: p.high,
                p: p.p,
            },
            Self::TruncatedNormal(p) => {
                let sd = p.var.sqrt();
                let mut a = (p.lower - p.loc) / sd;
                let mut b = (p.upper - p.loc) / sd;
                // Work in the lower tail where the CDF keeps relative precision.
                let mirrored = a > 0.0;
                if mirrored {
                    (a, b) = (-b, -a);
                }
                let cdf_lo = std_normal_cdf(a);
                let cdf_hi = std_normal_cdf(b);
                if !(cdf_hi > cdf_lo) {
                    return config_err(format!(
                        "truncated_normal: no probability mass on [{}, {}]",
                        p.lower, p.upper
                    ));
                }
                Sampler::TruncatedNormal {
                    loc: p.loc,
                    sd,
                    cdf_lo,
                    cdf_span: cdf_hi - cdf_lo,
                    mirrored,
                    lower: p.lower,
                    upper: p.upper,
                }
            }
            Self::TruncatedGamma(p) => {
                let p_lo = gamma_p(p.shape, p.lower / p.scale)?;
                let p_hi = gamma_p(p.shape, p.upper / p.scale)?;
                let mass = p_hi - p_lo;
                if !(mass > 0.0) {
                    return config_err(format!(
                        "truncated_gamma: no probability mass on [{}, {}]",
                        p.lower, p.upper
                    ));
                }
                let rejection = if mass >= REJECTION_MIN_MASS {
                    Some(Gamma::new(p.shape, p.scale).map_err(|e| Error::Config(e.to_string()))?)
                } else {
                    None
                };
                Sampler::TruncatedGamma {
                    shape: p.shape,
                    scale: p.scale,
                    p_lo,
                    mass,
                    lower: p.lower,
                    upper: p.upper,
                    rejection,
                }
            }
        })
    }

    /// Draws one reward. Prefer [`BoundedDistribution::sampler`] in loops.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<f64> {
        self.sampler()?.sample(stream)
    }

    /// Mean, variance, fourth central and fourth raw moments.
    ///
    /// Closed form for uniform and two-point laws; adaptive quadrature over
    /// the truncated density otherwise.
    pub fn moments(&self) -> Result<Moments> {
        self.validate()?;
        match self {
            Self::Uniform(p) => {
                let (l, u) = (p.lower, p.upper);
                let w = u - l;
                let raw4 = if w == 0.0 {
                    l.powi(4)
                } else {
                    (u.powi(5) - l.powi(5)) / (5.0 * w)
                };
                Ok(Moments {
                    mean: 0.5 * (l + u),
                    variance: w * w / 12.0,
                    fourth_central: w.powi(4) / 80.0,
                    fourth_raw: raw4,
                })
            }
            Self::BernoulliScaled(p) => {
                let d = p.high - p.low;
                let q = 1.0 - p.p;
                Ok(Moments {
                    mean: p.low + d * p.p,
                    variance: d * d * p.p * q,
                    fourth_central: d.powi(4) * p.p * q * (1.0 - 3.0 * p.p + 3.0 * p.p * p.p),
                    fourth_raw: q * p.low.powi(4) + p.p * p.high.powi(4),
                })
            }
            Self::TruncatedNormal(p) => {
                let loc = p.loc;
                let var = p.var;
                // unnormalised; peak of the kernel is 1
                let density = move |x: f64| (-(x - loc) * (x - loc) / (2.0 * var)).exp();
                truncated_moments(density, p.lower, p.upper)
            }
            Self::TruncatedGamma(p) => {
                let (a, b) = (p.shape, p.scale);
                let log_kernel = move |x: f64| (a - 1.0) * x.ln() - x / b;
                let mode = ((a - 1.0) * b).clamp(p.lower, p.upper);
                let mut peak = log_kernel(mode);
                if !peak.is_finite() {
                    peak = log_kernel(p.upper);
                }
                let density = move |x: f64| {
                    if x <= 0.0 {
                        0.0
                    } else {
                        (log_kernel(x) - peak).exp()
                    }
                };
                truncated_moments(density, p.lower, p.upper)
            }
        }
    }

    /// Oracle summary of the law under regularizer `reg`.
    pub fn true_moments(&self, reg: f64) -> Result<ArmTruth> {
        if !(reg > 0.0) || !reg.is_finite() {
            return config_err(format!("regularizer L must be > 0, got {reg}"));
        }
        Ok(ArmTruth::from_moments(self.moments()?, reg))
    }
}

fn truncated_moments<F: Fn(f64) -> f64>(density: F, lower: f64, upper: f64) -> Result<Moments> {
    let quad = |g: &dyn Fn(f64) -> f64| integrate(g, lower, upper, QUAD_REL_TOL, 0.0);
    let z = quad(&|x| density(x))?;
    if !(z > 0.0) {
        return Err(Error::Numeric(format!(
            "truncated density has no mass on [{lower}, {upper}]"
        )));
    }
    let mean = quad(&|x| x * density(x))? / z;
    let variance = quad(&|x| (x - mean).powi(2) * density(x))? / z;
    let fourth_central = quad(&|x| (x - mean).powi(4) * density(x))? / z;
    let fourth_raw = quad(&|x| x.powi(4) * density(x))? / z;
    Ok(Moments {
        mean,
        variance,
        fourth_central,
        fourth_raw,
    })
}

#[inline]
fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[inline]
fn std_normal_inv_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Prepared sampler for a [`BoundedDistribution`].
#[derive(Clone, Debug)]
pub enum Sampler {
    Uniform {
        lower: f64,
        width: f64,
    },
    TwoPoint {
        low: f64,
        high: f64,
        p: f64,
    },
    TruncatedNormal {
        loc: f64,
        sd: f64,
        cdf_lo: f64,
        cdf_span: f64,
        mirrored: bool,
        lower: f64,
        upper: f64,
    },
    TruncatedGamma {
        shape: f64,
        scale: f64,
        p_lo: f64,
        mass: f64,
        lower: f64,
        upper: f64,
        rejection: Option<Gamma<f64>>,
    },
}

impl Sampler {
    #[inline]
    pub fn sample(&self, stream: &mut RandomStream) -> Result<f64> {
        match self {
            Sampler::Uniform { lower, width } => Ok(lower + width * stream.uniform()),
            Sampler::TwoPoint { low, high, p } => {
                Ok(if stream.uniform() < *p { *high } else { *low })
            }
            Sampler::TruncatedNormal {
                loc,
                sd,
                cdf_lo,
                cdf_span,
                mirrored,
                lower,
                upper,
            } => {
                let u = cdf_lo + cdf_span * stream.open_uniform();
                let mut z = std_normal_inv_cdf(u);
                if *mirrored {
                    z = -z;
                }
                Ok((loc + sd * z).clamp(*lower, *upper))
            }
            Sampler::TruncatedGamma {
                shape,
                scale,
                p_lo,
                mass,
                lower,
                upper,
                rejection,
            } => match rejection {
                Some(gamma) => {
                    for _ in 0..MAX_REJECTIONS {
                        let x = gamma.sample(stream);
                        if x >= *lower && x <= *upper {
                            return Ok(x);
                        }
                    }
                    Err(Error::Numeric(format!(
                        "truncated gamma rejection sampling exceeded {MAX_REJECTIONS} attempts"
                    )))
                }
                None => {
                    let p = (p_lo + mass * stream.open_uniform()).min(1.0 - f64::EPSILON);
                    let x = scale * gamma_p_inv(*shape, p, 1e-12)?;
                    Ok(x.clamp(*lower, *upper))
                }
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub fourth_central: f64,
    pub fourth_raw: f64,
}

/// True per-arm quantities used for gaps, regret accounting and bound
/// overlays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmTruth {
    pub mean: f64,
    pub variance: f64,
    pub fourth_central: f64,
    pub fourth_raw: f64,
    /// `mu / (L + sigma)`
    pub sr: f64,
    /// `mu^2 / (L + sigma^2)`
    pub rssr: f64,
    /// `mu / (L + sigma^2)`
    pub sr_like: f64,
}

impl ArmTruth {
    pub fn from_moments(m: Moments, reg: f64) -> Self {
        let variance = m.variance.max(0.0);
        Self {
            mean: m.mean,
            variance,
            fourth_central: m.fourth_central,
            fourth_raw: m.fourth_raw,
            sr: m.mean / (reg + variance.sqrt()),
            rssr: m.mean * m.mean / (reg + variance),
            sr_like: m.mean / (reg + variance),
        }
    }

    /// Second raw moment `sigma^2 + mu^2`.
    pub fn second_raw(&self) -> f64 {
        self.variance + self.mean * self.mean
    }

    pub fn objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Variance => self.variance,
            Objective::SrLike => self.sr_like,
            Objective::Rssr => self.rssr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Variance,
    SrLike,
    Rssr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gaps {
    pub values: Vec<f64>,
    /// Lowest index attaining the maximum.
    pub optimal: usize,
    /// Set when more than one arm attains the maximum.
    pub tied: bool,
}

impl Gaps {
    pub fn is_optimal(&self, arm: usize) -> bool {
        self.values[arm] == 0.0
    }
}

/// Gaps `max_j f_j - f_i`, computed from a list of objective values.
pub fn gaps_from_values(values: &[f64]) -> Gaps {
    let (optimal, best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let tied = values.iter().filter(|&&v| v == best).count() > 1;
    Gaps {
        values: values.iter().map(|&v| best - v).collect(),
        optimal,
        tied,
    }
}

/// A set of arms under a common regularizer.
#[derive(Clone, Debug)]
pub struct BanditInstance {
    arms: Vec<BoundedDistribution>,
    samplers: Vec<Sampler>,
    regularizer: f64,
    truths: Vec<ArmTruth>,
    support: (f64, f64),
}

impl BanditInstance {
    pub fn new(arms: Vec<BoundedDistribution>, regularizer: f64) -> Result<Self> {
        if arms.len() < 2 {
            return config_err(format!("instance needs K >= 2 arms, got {}", arms.len()));
        }
        if !(regularizer > 0.0) || !regularizer.is_finite() {
            return config_err(format!("regularizer L must be > 0, got {regularizer}"));
        }
        let samplers = arms.iter().map(|a| a.sampler()).collect::<Result<Vec<_>>>()?;
        let truths = arms
            .iter()
            .map(|a| a.true_moments(regularizer))
            .collect::<Result<Vec<_>>>()?;
        let lower = arms.iter().map(|a| a.support().0).fold(f64::INFINITY, f64::min);
        let upper = arms.iter().map(|a| a.support().1).fold(f64::NEG_INFINITY, f64::max);
        if !(lower < upper) {
            return config_err(format!("instance support [{lower}, {upper}] is degenerate"));
        }
        Ok(Self {
            arms,
            samplers,
            regularizer,
            truths,
            support: (lower, upper),
        })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[BoundedDistribution] {
        &self.arms
    }

    pub fn regularizer(&self) -> f64 {
        self.regularizer
    }

    pub fn truths(&self) -> &[ArmTruth] {
        &self.truths
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    #[inline]
    pub fn pull(&self, arm: usize, stream: &mut RandomStream) -> Result<f64> {
        self.samplers[arm].sample(stream)
    }

    pub fn gaps(&self, objective: Objective) -> Gaps {
        let values: Vec<f64> = self.truths.iter().map(|t| t.objective(objective)).collect();
        gaps_from_values(&values)
    }

    /// Regret-minimisation experiments additionally need strictly positive
    /// rewards.
    pub fn validate_for_regret(&self) -> Result<()> {
        if self.support.0 <= 0.0 {
            return config_err(format!(
                "regret experiments need support lower bound l > 0, got {}",
                self.support.0
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn point_mass_uniform() {
        let d = BoundedDistribution::uniform(0.5, 0.5);
        let mut s = RandomStream::new(3, 0);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut s).unwrap(), 0.5);
        }
    }

    #[test]
    fn uniform_moments_closed_form() {
        let m = BoundedDistribution::uniform(0.0, 1.0).moments().unwrap();
        assert_relative_eq!(m.mean, 0.5);
        assert_relative_eq!(m.variance, 1.0 / 12.0);
        assert_relative_eq!(m.fourth_central, 1.0 / 80.0);
        assert_relative_eq!(m.fourth_raw, 0.2);
    }

    #[test]
    fn raw_and_central_fourth_moments_agree() {
        for d in [
            BoundedDistribution::uniform(0.3, 2.1),
            BoundedDistribution::uniform_from_moments(7.0, 14.083),
            BoundedDistribution::bernoulli_scaled(0.2, 1.7, 0.35),
        ] {
            let m = d.moments().unwrap();
            let raw2 = m.variance + m.mean * m.mean;
            let raw3 = third_raw(&d);
            let central = m.fourth_raw - 4.0 * m.mean * raw3 + 6.0 * m.mean.powi(2) * raw2
                - 3.0 * m.mean.powi(4);
            assert_relative_eq!(central, m.fourth_central, max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    fn third_raw(d: &BoundedDistribution) -> f64 {
        match d {
            BoundedDistribution::Uniform(p) => {
                (p.upper.powi(4) - p.lower.powi(4)) / (4.0 * (p.upper - p.lower))
            }
            BoundedDistribution::BernoulliScaled(p) => {
                (1.0 - p.p) * p.low.powi(3) + p.p * p.high.powi(3)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rssr_from_listed_inputs() {
        let t = BoundedDistribution::uniform_from_moments(7.0, 14.083)
            .true_moments(1.0)
            .unwrap();
        assert_relative_eq!(t.variance, 14.083, max_relative = 1e-12);
        assert_relative_eq!(t.rssr, 49.0 / 15.083, max_relative = 1e-12);
        assert_relative_eq!(t.rssr, 3.2487, epsilon = 5e-5);
    }

    #[test]
    fn zero_mean_gives_zero_ratios() {
        let t = BoundedDistribution::bernoulli_scaled(0.0, 0.0, 0.5)
            .true_moments(1.0)
            .unwrap();
        assert_eq!(t.rssr, 0.0);
        assert_eq!(t.sr_like, 0.0);
        assert_eq!(t.sr, 0.0);
    }

    #[test]
    fn truncated_normal_mean_matches_closed_form() {
        // E[X] = mu + sigma (phi(a) - phi(b)) / (Phi(b) - Phi(a))
        let (mu, var, lo, hi) = (5.0_f64, 4.0_f64, 1.0, 7.0);
        let sd = var.sqrt();
        let (a, b) = ((lo - mu) / sd, (hi - mu) / sd);
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let z = std_normal_cdf(b) - std_normal_cdf(a);
        let mean = mu + sd * (phi(a) - phi(b)) / z;
        let var_cf = var * (1.0 + (a * phi(a) - b * phi(b)) / z - ((phi(a) - phi(b)) / z).powi(2));
        let m = BoundedDistribution::truncated_normal(mu, var, lo, hi).moments().unwrap();
        assert_relative_eq!(m.mean, mean, max_relative = 1e-9);
        assert_relative_eq!(m.variance, var_cf, max_relative = 1e-8);
    }

    #[test]
    fn truncated_gamma_mean_matches_incomplete_gamma_identity() {
        // For X ~ Gamma(a, b): E[X 1{l<X<u}] = a b [P(a+1, u/b) - P(a+1, l/b)]
        let (a, b, lo, hi) = (2.0, 3.0, 1.0, 10.0);
        let z = gamma_p(a, hi / b).unwrap() - gamma_p(a, lo / b).unwrap();
        let num = a * b * (gamma_p(a + 1.0, hi / b).unwrap() - gamma_p(a + 1.0, lo / b).unwrap());
        let m = BoundedDistribution::truncated_gamma(a, b, lo, hi).moments().unwrap();
        assert_relative_eq!(m.mean, num / z, max_relative = 1e-9);
    }

    #[test]
    fn truncated_samples_stay_in_support() {
        let mut s = RandomStream::new(11, 2);
        for d in [
            BoundedDistribution::truncated_normal(5.0, 4.0, 1.0, 7.0),
            BoundedDistribution::truncated_normal(0.0, 1.0, 6.0, 7.0),
            BoundedDistribution::truncated_gamma(2.0, 2.0, 1.0, 10.0),
            BoundedDistribution::truncated_gamma(2.0, 0.1, 3.0, 4.0),
        ] {
            let sampler = d.sampler().unwrap();
            let (lo, hi) = d.support();
            for _ in 0..20_000 {
                let x = sampler.sample(&mut s).unwrap();
                assert!(x >= lo && x <= hi, "{x} outside [{lo}, {hi}] for {d:?}");
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BoundedDistribution::truncated_normal(0.0, -1.0, 0.0, 1.0).validate().is_err());
        assert!(BoundedDistribution::truncated_gamma(0.0, 1.0, 0.0, 1.0).validate().is_err());
        assert!(BoundedDistribution::truncated_gamma(1.0, 1.0, 2.0, 1.0).validate().is_err());
        assert!(BoundedDistribution::uniform(2.0, 1.0).validate().is_err());
        assert!(BoundedDistribution::uniform(-1.0, 1.0).validate().is_err());
        assert!(BoundedDistribution::bernoulli_scaled(0.0, 1.0, 1.5).validate().is_err());
        assert!(BanditInstance::new(vec![BoundedDistribution::uniform(0.0, 1.0)], 1.0).is_err());
        assert!(BanditInstance::new(
            vec![BoundedDistribution::uniform(0.0, 1.0), BoundedDistribution::uniform(0.0, 1.0)],
            0.0
        )
        .is_err());
    }

    #[test]
    fn variance_gaps_for_shvv_experiment() {
        let mut arms = vec![BoundedDistribution::uniform(0.0, 1.0)];
        arms.extend((0..15).map(|_| BoundedDistribution::uniform_from_moments(0.5, 1.0 / 15.0)));
        let inst = BanditInstance::new(arms, 1.0).unwrap();
        let g = inst.gaps(Objective::Variance);
        assert_eq!(g.optimal, 0);
        assert!(!g.tied);
        assert_eq!(g.values[0], 0.0);
        for &v in &g.values[1..] {
            assert_relative_eq!(v, 1.0 / 60.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn rssr_gap_two_arm_instance() {
        let inst = BanditInstance::new(
            vec![
                BoundedDistribution::uniform_from_moments(7.0, 14.083),
                BoundedDistribution::uniform_from_moments(7.075, 14.97),
            ],
            1.0,
        )
        .unwrap();
        let g = inst.gaps(Objective::Rssr);
        assert_eq!(g.optimal, 0);
        let expected = 49.0 / 15.083 - 50.055625 / 15.97;
        assert_relative_eq!(g.values[1], expected, max_relative = 1e-10);
        assert_relative_eq!(g.values[1], 0.114, epsilon = 5e-4);
        inst.validate_for_regret().unwrap();
    }

    #[test]
    fn identical_arms_all_tied() {
        let d = BoundedDistribution::uniform(0.2, 0.8);
        let inst = BanditInstance::new(vec![d.clone(), d.clone(), d], 1.0).unwrap();
        for obj in [Objective::Variance, Objective::SrLike, Objective::Rssr] {
            let g = inst.gaps(obj);
            assert!(g.tied);
            assert_eq!(g.optimal, 0);
            assert!(g.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn json_shape() {
        let d: BoundedDistribution =
            serde_json::from_str(r#"{"kind":"truncated_gamma","params":{"shape":2,"scale":3,"lower":1,"upper":10}}"#)
                .unwrap();
        assert_eq!(d, BoundedDistribution::truncated_gamma(2.0, 3.0, 1.0, 10.0));
        assert!(serde_json::from_str::<BoundedDistribution>(
            r#"{"kind":"uniform","params":{"lower":0,"upper":1,"extra":2}}"#
        )
        .is_err());
    }
}
