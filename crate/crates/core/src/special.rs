//! Regularized incomplete gamma function (from statrs) and its inverse,
//! used for chi-square quantiles and truncated-gamma CDFs.

use statrs::function::gamma::{checked_gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x.is_nan() {
        return Err(Error::Numeric(format!("gamma_p undefined for a={a}, x={x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    checked_gamma_lr(a, x).map_err(|e| Error::Numeric(format!("gamma_p(a={a}, x={x}): {e}")))
}

/// Inverse of `x -> P(a, x)`: the `x` with `P(a, x) = p`.
///
/// Newton steps safeguarded by a bisection bracket, converged to `tol`
/// relative in `x`.
pub fn gamma_p_inv(a: f64, p: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0) || !(0.0..1.0).contains(&p) {
        return Err(Error::Numeric(format!("gamma_p_inv undefined for a={a}, p={p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }

    let mut lo = 0.0_f64;
    let mut hi = a.max(1.0);
    while gamma_p(a, hi)? < p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric("gamma_p_inv bracket overflow".into()));
        }
    }

    let lg = ln_gamma(a);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..500 {
        let f = gamma_p(a, x)? - p;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = ((a - 1.0) * x.ln() - x - lg).exp();
        let newton = x - f / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) || hi - lo <= tol * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numeric(format!("gamma_p_inv did not converge (a={a}, p={p})")))
}

/// Chi-square quantile: the value `c` with `P(X <= c) = prob` for
/// `X ~ chi^2(dof)`.
pub fn chi_square_quantile(prob: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) || !(0.0..1.0).contains(&prob) {
        return Err(Error::Numeric(format!(
            "chi-square quantile undefined for dof={dof}, prob={prob}"
        )));
    }
    Ok(2.0 * gamma_p_inv(0.5 * dof, prob, 1e-12)?)
}

/// Memoised chi-square quantiles at a fixed probability, indexed by integer
/// degrees of freedom.
#[derive(Clone, Debug)]
pub struct ChiSquareTable {
    prob: f64,
    values: Vec<f64>,
}

impl ChiSquareTable {
    pub fn new(prob: f64) -> Self {
        Self {
            prob,
            values: vec![f64::NAN],
        }
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }

    pub fn get(&mut self, dof: usize) -> Result<f64> {
        if dof == 0 {
            return Err(Error::Numeric("chi-square quantile needs dof >= 1".into()));
        }
        while self.values.len() <= dof {
            let d = self.values.len();
            let q = chi_square_quantile(self.prob, d as f64)?;
            self.values.push(q);
        }
        Ok(self.values[dof])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn gamma_p_known_values() {
        // P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 1.0, 3.0, 20.0] {
            assert_relative_eq!(gamma_p(1.0, x).unwrap(), 1.0 - (-x).exp(), max_relative = 1e-13);
        }
        assert_eq!(gamma_p(2.0, 0.0).unwrap(), 0.0);
        // P(3, 2) = 1 - e^{-2} (1 + 2 + 2)
        assert_relative_eq!(gamma_p(3.0, 2.0).unwrap(), 1.0 - 5.0 * (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn chi_square_table_values() {
        // standard table entries
        assert_relative_eq!(chi_square_quantile(0.95, 10.0).unwrap(), 18.307038, max_relative = 1e-6);
        assert_relative_eq!(chi_square_quantile(0.95, 1.0).unwrap(), 3.841459, max_relative = 1e-6);
        assert_relative_eq!(chi_square_quantile(0.05, 5.0).unwrap(), 1.145476, max_relative = 1e-6);
    }

    #[test]
    fn chi_square_matches_independent_cdf() {
        for dof in [1.0, 2.0, 3.5, 10.0, 57.0, 400.0, 9999.0] {
            let reference = ChiSquared::new(dof).unwrap();
            for prob in [0.01, 0.5, 0.95] {
                let ours = chi_square_quantile(prob, dof).unwrap();
                assert_relative_eq!(reference.cdf(ours), prob, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn table_is_memoised_and_consistent() {
        let mut t = ChiSquareTable::new(0.95);
        let a = t.get(10).unwrap();
        assert_relative_eq!(a, chi_square_quantile(0.95, 10.0).unwrap());
        assert_eq!(t.get(10).unwrap().to_bits(), a.to_bits());
        assert!(t.get(0).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for a in [0.5, 1.0, 2.0, 7.5, 120.0] {
            for p in [1e-6, 1e-4, 0.2, 0.5, 0.9, 0.999999] {
                let x = gamma_p_inv(a, p, 1e-13).unwrap();
                assert_relative_eq!(gamma_p(a, x).unwrap(), p, max_relative = 1e-8);
            }
        }
    }
}
