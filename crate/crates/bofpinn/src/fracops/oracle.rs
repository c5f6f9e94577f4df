//! Closed-form Riesz derivatives used as validation oracles.
//!
//! Two families are supported on the unit interval:
//! - the cubic bump `x³(1-x)³`, whose left Riemann-Liouville derivative is a
//!   four-term Γ-series (exact);
//! - `sin(kπx)` for k = 1, 2, via the term-by-term derivative of the Taylor
//!   series truncated at `M` terms (default 50, far below round-off at these
//!   wavenumbers).
//!
//! Right-sided derivatives follow from the reflections `sin(kπ(1-z))`
//! = ±sin(kπz), so each value is `c_α (S(x) ± S(1-x))`.

use statrs::function::gamma::gamma;

use super::riesz_coeff;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FracBasis {
    /// `x³(1-x)³`
    CubicBump,
    /// `sin(kπx)`, k = 1 or 2
    Sine(u32),
}

/// Analytic Riesz derivative evaluator on the open unit interval.
#[derive(Clone, Debug)]
pub struct AnalyticFracOracle {
    pub basis: FracBasis,
    pub alpha: f64,
    /// Taylor truncation count for the sine family.
    pub terms: usize,
}

impl AnalyticFracOracle {
    pub fn new(basis: FracBasis, alpha: f64, terms: usize) -> Result<Self> {
        riesz_coeff(alpha)?;
        if terms < 10 {
            return Err(Error::InvalidArg(format!("truncation count {terms} < 10")));
        }
        if let FracBasis::Sine(k) = basis {
            if !(1..=2).contains(&k) {
                return Err(Error::InvalidArg(format!("unsupported basis sin({k}πx)")));
            }
        }
        Ok(Self { basis, alpha, terms })
    }

    /// Default truncation M = 50.
    pub fn with_default_terms(basis: FracBasis, alpha: f64) -> Result<Self> {
        Self::new(basis, alpha, 50)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidArg(format!(
                "fractional series is singular at the endpoints; x = {x}"
            )));
        }
        let c = riesz_coeff(self.alpha)?;
        Ok(match self.basis {
            FracBasis::CubicBump => {
                c * (left_rl_bump(x, self.alpha) + left_rl_bump(1.0 - x, self.alpha))
            }
            FracBasis::Sine(k) => {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                c * (left_rl_sine(k, x, self.alpha, self.terms)
                    + sign * left_rl_sine(k, 1.0 - x, self.alpha, self.terms))
            }
        })
    }
}

/// Left Riemann-Liouville derivative of `z³(1-z)³ = z³ - 3z⁴ + 3z⁵ - z⁶`.
pub fn left_rl_bump(z: f64, alpha: f64) -> f64 {
    let coeff = [1.0, -3.0, 3.0, -1.0];
    let mut acc = 0.0;
    for (i, c) in coeff.iter().enumerate() {
        let p = (i + 3) as f64;
        acc += c * gamma(p + 1.0) / gamma(p + 1.0 - alpha) * z.powf(p - alpha);
    }
    acc
}

/// Left Riemann-Liouville derivative of `sin(kπz)`: the Taylor series of the
/// sine differentiated term by term,
/// `Σ_{m≥1} (-1)^{m-1} (kπ)^{2m-1} z^{2m-1-α} / Γ(2m-α)`.
pub fn left_rl_sine(k: u32, z: f64, alpha: f64, terms: usize) -> f64 {
    let kpi = k as f64 * std::f64::consts::PI;
    // first term, then the recurrence t_{m+1} = -t_m (kπz)² / ((2m-α)(2m+1-α))
    let mut t = kpi * z.powf(1.0 - alpha) / gamma(2.0 - alpha);
    let q = (kpi * z) * (kpi * z);
    let mut acc = t;
    for m in 1..terms {
        let d = (2.0 * m as f64 - alpha) * (2.0 * m as f64 + 1.0 - alpha);
        t *= -q / d;
        acc += t;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{shifted_gl_apply, GlOrder, Grid1D};

    #[test]
    fn bump_series_is_symmetric() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let o = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, alpha).unwrap();
            for &x in &[0.1, 0.25, 0.4] {
                let a = o.eval(x).unwrap();
                let b = o.eval(1.0 - x).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn endpoints_and_bad_bases_rejected() {
        let o = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, 1.5).unwrap();
        assert!(o.eval(0.0).is_err());
        assert!(o.eval(1.0).is_err());
        assert!(AnalyticFracOracle::with_default_terms(FracBasis::Sine(3), 1.5).is_err());
        assert!(AnalyticFracOracle::new(FracBasis::CubicBump, 1.5, 5).is_err());
    }

    #[test]
    fn bump_series_approaches_second_derivative_as_alpha_to_two() {
        // f'' of x³(1-x)³ at 1/2 is -0.375
        let o = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, 1.999).unwrap();
        let v = o.eval(0.5).unwrap();
        assert!((v - (-0.375)).abs() / 0.375 < 0.01, "{v}");
    }

    #[test]
    fn sine_series_approaches_second_derivative_as_alpha_to_two() {
        // (sin πx)'' = -π² sin(πx)
        let o = AnalyticFracOracle::with_default_terms(FracBasis::Sine(1), 1.9999).unwrap();
        let x = 0.3;
        let expect = -std::f64::consts::PI.powi(2) * (std::f64::consts::PI * x).sin();
        let v = o.eval(x).unwrap();
        assert!((v - expect).abs() / expect.abs() < 0.01, "{v} vs {expect}");
    }

    #[test]
    fn sine_oracle_matches_fine_grid_stencil() {
        let grid = Grid1D::new(0.0, 1.0, 4096).unwrap();
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| (std::f64::consts::PI * x).sin())
            .collect();
        let mut f = f;
        f[0] = 0.0;
        *f.last_mut().unwrap() = 0.0;
        let out = shifted_gl_apply(grid, &f, 1.5, GlOrder::Second).unwrap();
        let o = AnalyticFracOracle::with_default_terms(FracBasis::Sine(1), 1.5).unwrap();
        let j = 2048; // x = 0.5
        let v = o.eval(0.5).unwrap();
        assert!((out[j - 1] - v).abs() < 1e-4, "{} vs {v}", out[j - 1]);
    }
}
