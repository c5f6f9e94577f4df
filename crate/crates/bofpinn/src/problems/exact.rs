//! Closed-form reference solutions for the manufactured benchmarks.

use crate::fracops::{left_rl_bump, left_rl_sine, riesz_coeff};

/// The 1D reaction-diffusion benchmark with crossing scale factors:
/// `u = 100 sin(t/2+π/4) x³(1-x)³ - √3(1.5+sin t) sin(πx)(2ξ₁-1)
///    + √3(1.5+cos 3t) sin(2πx)(2ξ₂-1)` on `[0,1] × [0,π]`, ξ ~ U(0,1)².
///
/// Normalized components: `u₁ = -√2 sin(πx)`, `u₂ = √2 sin(2πx)`,
/// `a₁ = (1.5+sin t)/√2`, `a₂ = (1.5+cos 3t)/√2`, `Y_i = √3(2ξ_i-1)`.
/// The scale factors cross where `sin t = cos 3t`, first at `t = π/8`.
pub mod cross {
    use std::f64::consts::{FRAC_PI_4, PI};

    pub const N_MODES: usize = 2;

    pub fn bump(x: f64) -> f64 {
        x.powi(3) * (1.0 - x).powi(3)
    }

    pub fn mean(x: f64, t: f64) -> f64 {
        100.0 * (0.5 * t + FRAC_PI_4).sin() * bump(x)
    }

    pub fn d_mean_dt(x: f64, t: f64) -> f64 {
        50.0 * (0.5 * t + FRAC_PI_4).cos() * bump(x)
    }

    /// Normalized spatial mode (⟨u_i, u_i⟩ = 1 on [0,1]).
    pub fn mode(i: usize, x: f64) -> f64 {
        match i {
            0 => -(2.0f64.sqrt()) * (PI * x).sin(),
            1 => 2.0f64.sqrt() * (2.0 * PI * x).sin(),
            _ => panic!("mode index {i} out of range"),
        }
    }

    pub fn a(i: usize, t: f64) -> f64 {
        match i {
            0 => (1.5 + t.sin()) / 2.0f64.sqrt(),
            1 => (1.5 + (3.0 * t).cos()) / 2.0f64.sqrt(),
            _ => panic!("mode index {i} out of range"),
        }
    }

    pub fn da_dt(i: usize, t: f64) -> f64 {
        match i {
            0 => t.cos() / 2.0f64.sqrt(),
            1 => -3.0 * (3.0 * t).sin() / 2.0f64.sqrt(),
            _ => panic!("mode index {i} out of range"),
        }
    }

    /// Stochastic coefficient with unit variance, zero mean (ξ ~ U(0,1)).
    pub fn y(i: usize, xi: &[f64]) -> f64 {
        3.0f64.sqrt() * (2.0 * xi[i] - 1.0)
    }

    pub fn solution(x: f64, t: f64, xi: &[f64]) -> f64 {
        mean(x, t) + a(0, t) * mode(0, x) * y(0, xi) + a(1, t) * mode(1, x) * y(1, xi)
    }

    pub fn d_solution_dt(x: f64, t: f64, xi: &[f64]) -> f64 {
        d_mean_dt(x, t)
            + da_dt(0, t) * mode(0, x) * y(0, xi)
            + da_dt(1, t) * mode(1, x) * y(1, xi)
    }

    pub fn variance(x: f64, t: f64) -> f64 {
        let v1 = (1.5 + t.sin()) * (PI * x).sin();
        let v2 = (1.5 + (3.0 * t).cos()) * (2.0 * PI * x).sin();
        v1 * v1 + v2 * v2
    }

    /// First root of `sin t = cos 3t`.
    pub fn crossing_time() -> f64 {
        PI / 8.0
    }
}

/// The deterministic benchmark `u = 100 e^{-t} x³(1-x)³` for the fractional
/// PINN / FDM comparison.
pub mod appd {
    pub fn solution(x: f64, t: f64) -> f64 {
        100.0 * (-t).exp() * x.powi(3) * (1.0 - x).powi(3)
    }

    pub fn d_solution_dt(x: f64, t: f64) -> f64 {
        -solution(x, t)
    }
}

/// Riesz derivative of the cubic bump at interior x (exact Γ-series).
pub fn riesz_bump(x: f64, alpha: f64) -> f64 {
    riesz_coeff(alpha).unwrap() * (left_rl_bump(x, alpha) + left_rl_bump(1.0 - x, alpha))
}

/// Riesz derivative of `sin(kπx)` at interior x (truncated series).
pub fn riesz_sine(k: u32, x: f64, alpha: f64, terms: usize) -> f64 {
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    riesz_coeff(alpha).unwrap()
        * (left_rl_sine(k, x, alpha, terms) + sign * left_rl_sine(k, 1.0 - x, alpha, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bo_components_reassemble_the_solution() {
        let xi = [0.3, 0.8];
        for &(x, t) in &[(0.2, 0.5), (0.55, 2.0), (0.9, 3.0)] {
            let direct = cross::mean(x, t)
                - 3.0f64.sqrt() * (1.5 + t.sin()) * (std::f64::consts::PI * x).sin()
                    * (2.0 * xi[0] - 1.0)
                + 3.0f64.sqrt()
                    * (1.5 + (3.0 * t).cos())
                    * (2.0 * std::f64::consts::PI * x).sin()
                    * (2.0 * xi[1] - 1.0);
            assert!((cross::solution(x, t, &xi) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn crossing_is_where_the_scales_meet() {
        let t = cross::crossing_time();
        assert!((cross::a(0, t) - cross::a(1, t)).abs() < 1e-12);
    }

    #[test]
    fn variance_at_pi_midpoint_is_2_25() {
        let v = cross::variance(0.5, std::f64::consts::PI);
        assert!((v - 2.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn modes_are_unit_normalized_under_the_inner_product() {
        use crate::fracops::Grid1D;
        let grid = Grid1D::new(0.0, 1.0, 400).unwrap();
        for i in 0..2 {
            let f: Vec<f64> = grid.nodes().iter().map(|&x| cross::mode(i, x)).collect();
            let ip = grid.inner(&f, &f);
            assert!((ip - 1.0).abs() < 1e-6, "mode {i}: {ip}");
        }
    }
}
