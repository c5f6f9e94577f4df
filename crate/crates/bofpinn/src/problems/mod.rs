//! Benchmark problem definitions.
//!
//! Every problem is an instance of
//! `u_t = μ (D^α + D^β) u + ε K(x;ξ) f(u) + g(x,t;ξ)` with homogeneous
//! Dirichlet boundaries; the residual convention used throughout losses and
//! solvers is `R = u_t - μ D u - ε K f(u) - g`.

pub mod exact;
mod forcing;

pub use forcing::{
    evolving_envelope, Forcing1D, Forcing2D, InterpField, KlField, PreparedForcing1D,
    ReactionCoeff,
};

use crate::error::Result;
use crate::stochastic::{CovKernel, VariableLaw};

/// `f(u)` selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonlinearity {
    None,
    /// `f(u) = u (1 - u²)`
    CubicReaction,
}

impl Nonlinearity {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::None => 0.0,
            Nonlinearity::CubicReaction => u * (1.0 - u * u),
        }
    }
}

/// Initial condition selector (1D).
#[derive(Clone, Debug)]
pub enum Ic1D {
    /// Identically zero.
    Zero,
    /// `sin(πx)` (deterministic)
    SinPi,
    /// `100 x³(1-x)³` (deterministic)
    Bump100,
    /// The crossing benchmark's random initial state (its exact solution at
    /// t = 0).
    ManufacturedCross,
}

impl Ic1D {
    pub fn eval(&self, x: f64, xi: &[f64]) -> f64 {
        match self {
            Ic1D::Zero => 0.0,
            Ic1D::SinPi => (std::f64::consts::PI * x).sin(),
            Ic1D::Bump100 => 100.0 * x.powi(3) * (1.0 - x).powi(3),
            Ic1D::ManufacturedCross => exact::cross::solution(x, 0.0, xi),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Ic1D::ManufacturedCross)
    }
}

/// One-dimensional stochastic fractional reaction-diffusion problem.
#[derive(Clone, Debug)]
pub struct Problem1D {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub nonlinearity: Nonlinearity,
    pub reaction: ReactionCoeff,
    pub forcing: Forcing1D,
    pub ic: Ic1D,
    pub t_end: f64,
    pub law: VariableLaw,
}

impl Problem1D {
    pub fn xi_dim(&self) -> usize {
        self.forcing.xi_dim()
    }
}

/// Initial condition selector (2D).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ic2D {
    Zero,
    /// `sin(2πx₁) sin(2πx₂)`
    SinSin,
}

impl Ic2D {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match self {
            Ic2D::Zero => 0.0,
            Ic2D::SinSin => {
                (2.0 * std::f64::consts::PI * x1).sin() * (2.0 * std::f64::consts::PI * x2).sin()
            }
        }
    }
}

/// Two-dimensional problem on a rectangle.
#[derive(Clone, Debug)]
pub struct Problem2D {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub nonlinearity: Nonlinearity,
    pub reaction: ReactionCoeff,
    pub forcing: Forcing2D,
    pub ic: Ic2D,
    pub t_end: f64,
    pub law: VariableLaw,
}

impl Problem2D {
    /// Total random dimension including the reaction variable when present.
    pub fn xi_dim(&self) -> usize {
        let f = self.forcing.xi_dim();
        match self.reaction {
            ReactionCoeff::RandomScale { xi_index, .. } => f.max(xi_index + 1),
            ReactionCoeff::One => f,
        }
    }
}

/// §-style benchmark constructors with the settings used throughout.
pub mod benchmarks {
    use super::*;

    /// Nonlinear reaction-diffusion with the crossing manufactured solution
    /// on `[0,1] × [0,π]`, ξ ~ U(0,1)².
    pub fn manufactured_cross(alpha: f64, taylor_terms: usize) -> Problem1D {
        Problem1D {
            a: 0.0,
            b: 1.0,
            alpha,
            mu: 1.0,
            epsilon: 1.0,
            nonlinearity: Nonlinearity::CubicReaction,
            reaction: ReactionCoeff::One,
            forcing: Forcing1D::ManufacturedCross { alpha, terms: taylor_terms },
            ic: Ic1D::ManufacturedCross,
            t_end: std::f64::consts::PI,
            law: VariableLaw::Uniform01,
        }
    }

    /// Deterministic benchmark `u = 100 e^{-t} x³(1-x)³` on `[0,1] × [0,1]`.
    pub fn appendix_d(alpha: f64) -> Problem1D {
        Problem1D {
            a: 0.0,
            b: 1.0,
            alpha,
            mu: 1.0,
            epsilon: 1.0,
            nonlinearity: Nonlinearity::CubicReaction,
            reaction: ReactionCoeff::One,
            forcing: Forcing1D::AppendixD { alpha },
            ic: Ic1D::Bump100,
            t_end: 1.0,
            law: VariableLaw::Uniform01,
        }
    }

    /// Forward problem with time-independent Gaussian random forcing
    /// `g = (1-x²) h`, `h ~ GP(1, C)` on `(-1,1)`; `n_modes` KL modes of the
    /// forcing's own (bubble-weighted) kernel.
    pub fn forcing_static(
        alpha: f64,
        mu: f64,
        epsilon: f64,
        sigma_h: f64,
        l_c: f64,
        n_modes: usize,
        t_end: f64,
        kl_resolution: usize,
    ) -> Result<Problem1D> {
        let kernel = CovKernel::squared_exponential(sigma_h, l_c)?;
        let field = KlField::build(
            &kernel,
            -1.0,
            1.0,
            kl_resolution,
            n_modes,
            |x| 1.0 - x * x,
            |x| 1.0 - x * x,
        )?;
        Ok(Problem1D {
            a: -1.0,
            b: 1.0,
            alpha,
            mu,
            epsilon,
            nonlinearity: Nonlinearity::CubicReaction,
            reaction: ReactionCoeff::One,
            forcing: Forcing1D::KlStatic { field },
            ic: Ic1D::SinPi,
            t_end,
            law: VariableLaw::StandardNormal,
        })
    }

    /// Forward problem with time-evolving random forcing
    /// `g = 1 + (1/10) Σ γ_i(t) λ_i φ_i ξ_i`, ξ ~ U(-1,1)⁵, where (λ, φ) are
    /// eigenpairs of the kernel of `(1-x²) GP(0, C)` with σ = 1, l_c = 0.4.
    pub fn forcing_evolving(
        alpha: f64,
        mu: f64,
        epsilon: f64,
        t_end: f64,
        kl_resolution: usize,
    ) -> Result<Problem1D> {
        let kernel = CovKernel::squared_exponential(1.0, 0.4)?;
        let field = KlField::build(&kernel, -1.0, 1.0, kl_resolution, 5, |x| 1.0 - x * x, |_| 0.0)?;
        Ok(Problem1D {
            a: -1.0,
            b: 1.0,
            alpha,
            mu,
            epsilon,
            nonlinearity: Nonlinearity::CubicReaction,
            reaction: ReactionCoeff::One,
            forcing: Forcing1D::KlEvolving { field, scale: 0.1 },
            ic: Ic1D::SinPi,
            t_end,
            law: VariableLaw::UniformSym,
        })
    }

    /// 2D reaction-diffusion on `(0,1)²` with cosine-expansion forcing and a
    /// random reaction coefficient `K(1+σξ)`, all variables U(-√3,√3).
    pub fn rd2d(alpha: f64) -> Problem2D {
        let forcing = Forcing2D::CosineExpansion { l: 1.0 / 3.0, p1: 4, p2: 4 };
        let f_dim = forcing.xi_dim();
        Problem2D {
            x1: (0.0, 1.0),
            x2: (0.0, 1.0),
            alpha,
            beta: alpha,
            mu: 1.0,
            epsilon: 1.0,
            nonlinearity: Nonlinearity::CubicReaction,
            reaction: ReactionCoeff::RandomScale { k0: 1.0, sigma: 1.0, xi_index: f_dim },
            forcing,
            ic: Ic2D::SinSin,
            t_end: 1.0,
            law: VariableLaw::UniformSqrt3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_dimensions() {
        let p = benchmarks::manufactured_cross(1.5, 50);
        assert_eq!(p.xi_dim(), 2);
        let p = benchmarks::appendix_d(1.5);
        assert_eq!(p.xi_dim(), 0);
        let p = benchmarks::rd2d(1.8);
        assert_eq!(p.xi_dim(), 16);
        assert_eq!(p.forcing.xi_dim(), 15);
    }

    #[test]
    fn cubic_reaction_values() {
        let f = Nonlinearity::CubicReaction;
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert!((f.eval(0.5) - 0.375).abs() < 1e-15);
    }
}
