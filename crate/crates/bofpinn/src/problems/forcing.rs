//! Forcing descriptors and their grid-prepared evaluators.
//!
//! Forcing terms are described abstractly (closed forms or KL expansions of
//! a kernel) and materialized on a concrete grid once, so per-(t, ξ)
//! evaluation is a few fused multiply-adds per node. KL eigenfunctions are
//! computed on a fixed fine reference grid and linearly interpolated, which
//! keeps a random field well-defined as a function of (x, ξ) regardless of
//! which solver grid consumes it.

use crate::error::Result;
use crate::fracops::Grid1D;
use crate::stochastic::{kl_decompose, se_kernel_matrix, CovKernel, KlBasis};
use crate::tensor::Tensor;

use super::exact::{cross, riesz_bump, riesz_sine};

/// Field sampled on a uniform grid with linear interpolation between nodes.
#[derive(Clone, Debug)]
pub struct InterpField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl InterpField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_nodes());
        Self { grid, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let s = ((x - self.grid.a) / dx).clamp(0.0, self.grid.n as f64);
        let j = (s.floor() as usize).min(self.grid.n - 1);
        let w = s - j as f64;
        (1.0 - w) * self.values[j] + w * self.values[j + 1]
    }
}

/// A KL representation of a random field, fixed on a fine reference grid.
#[derive(Clone, Debug)]
pub struct KlField {
    pub lambdas: Vec<f64>,
    pub modes: Vec<InterpField>,
    pub mean: InterpField,
}

impl KlField {
    /// KL of the kernel `bubble(x) bubble(y) C(x,y)` on `[a,b]`, keeping
    /// `n_modes` modes; `mean` is evaluated on the same grid.
    pub fn build(
        kernel: &CovKernel,
        a: f64,
        b: f64,
        resolution: usize,
        n_modes: usize,
        bubble: impl Fn(f64) -> f64,
        mean: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let grid = Grid1D::new(a, b, resolution)?;
        let pts = grid.nodes();
        let c = se_kernel_matrix(&pts, kernel);
        let cw = Tensor::from_fn(pts.len(), pts.len(), |i, j| {
            bubble(pts[i]) * bubble(pts[j]) * c.get(i, j)
        });
        let basis: KlBasis = kl_decompose(&cw, &grid.trapezoid_weights(), n_modes)?;
        let modes = basis
            .phis
            .iter()
            .map(|phi| InterpField::new(grid, phi.clone()))
            .collect();
        let mean = InterpField::new(grid, pts.iter().map(|&x| mean(x)).collect());
        Ok(Self { lambdas: basis.lambdas.clone(), modes, mean })
    }

    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }
}

/// Envelope functions for the time-evolving forcing:
/// `γ = [√(2(1+t)), √(3(1+t)²), √(5(1+t)³), √(50t), √(10t²)]`.
pub fn evolving_envelope(i: usize, t: f64) -> f64 {
    match i {
        0 => (2.0 * (1.0 + t)).sqrt(),
        1 => (3.0 * (1.0 + t) * (1.0 + t)).sqrt(),
        2 => (5.0 * (1.0 + t).powi(3)).sqrt(),
        3 => (50.0 * t).sqrt(),
        4 => (10.0 * t * t).sqrt(),
        _ => panic!("envelope index {i} out of range"),
    }
}

#[derive(Clone, Debug)]
pub enum Forcing1D {
    /// Identically zero.
    Zero,
    /// Manufactured forcing of the crossing benchmark (depends on α through
    /// the exact Riesz derivatives; `terms` truncates the sine series).
    ManufacturedCross { alpha: f64, terms: usize },
    /// Deterministic manufactured forcing for `u = 100 e^{-t} x³(1-x)³`.
    AppendixD { alpha: f64 },
    /// Time-independent KL field: `g(x;ξ) = mean(x) + Σ √λ_i φ_i(x) ξ_i`.
    KlStatic { field: KlField },
    /// Time-evolving: `g(x,t;ξ) = 1 + scale · Σ γ_i(t) λ_i φ_i(x) ξ_i`.
    KlEvolving { field: KlField, scale: f64 },
}

impl Forcing1D {
    pub fn xi_dim(&self) -> usize {
        match self {
            Forcing1D::Zero => 0,
            Forcing1D::ManufacturedCross { .. } => 2,
            Forcing1D::AppendixD { .. } => 0,
            Forcing1D::KlStatic { field } => field.n_modes(),
            Forcing1D::KlEvolving { field, .. } => field.n_modes(),
        }
    }

    pub fn time_dependent(&self) -> bool {
        !matches!(self, Forcing1D::KlStatic { .. })
    }

    pub fn prepare(&self, grid: &Grid1D) -> PreparedForcing1D {
        let nodes = grid.nodes();
        let n = nodes.len();
        match self {
            Forcing1D::Zero => PreparedForcing1D::Zero,
            Forcing1D::ManufacturedCross { alpha, terms } => {
                let profile = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
                    nodes.iter().map(|&x| f(x)).collect()
                };
                let interior = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
                    // the exact Riesz derivative of the modes is singular at
                    // the endpoints; forcing is only ever read at interior
                    // nodes, so pin the boundary entries to zero
                    nodes
                        .iter()
                        .enumerate()
                        .map(|(j, &x)| if j == 0 || j == n - 1 { 0.0 } else { f(x) })
                        .collect()
                };
                PreparedForcing1D::Cross {
                    bump: profile(&cross::bump),
                    sin1: profile(&|x| (std::f64::consts::PI * x).sin()),
                    sin2: profile(&|x| (2.0 * std::f64::consts::PI * x).sin()),
                    riesz_bump: interior(&|x| riesz_bump(x, *alpha)),
                    riesz_sin1: interior(&|x| riesz_sine(1, x, *alpha, *terms)),
                    riesz_sin2: interior(&|x| riesz_sine(2, x, *alpha, *terms)),
                }
            }
            Forcing1D::AppendixD { alpha } => PreparedForcing1D::AppD {
                bump: nodes.iter().map(|&x| cross::bump(x)).collect(),
                riesz_bump: nodes
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| if j == 0 || j == n - 1 { 0.0 } else { riesz_bump(x, *alpha) })
                    .collect(),
            },
            Forcing1D::KlStatic { field } => PreparedForcing1D::KlStatic {
                mean: nodes.iter().map(|&x| field.mean.eval(x)).collect(),
                scaled_modes: field
                    .modes
                    .iter()
                    .zip(&field.lambdas)
                    .map(|(m, &l)| nodes.iter().map(|&x| l.sqrt() * m.eval(x)).collect())
                    .collect(),
            },
            Forcing1D::KlEvolving { field, scale } => PreparedForcing1D::KlEvolving {
                scaled_modes: field
                    .modes
                    .iter()
                    .zip(&field.lambdas)
                    .map(|(m, &l)| nodes.iter().map(|&x| scale * l * m.eval(x)).collect())
                    .collect(),
            },
        }
    }
}

/// Grid-cached forcing evaluator.
pub enum PreparedForcing1D {
    Zero,
    Cross {
        bump: Vec<f64>,
        sin1: Vec<f64>,
        sin2: Vec<f64>,
        riesz_bump: Vec<f64>,
        riesz_sin1: Vec<f64>,
        riesz_sin2: Vec<f64>,
    },
    AppD {
        bump: Vec<f64>,
        riesz_bump: Vec<f64>,
    },
    KlStatic {
        mean: Vec<f64>,
        scaled_modes: Vec<Vec<f64>>,
    },
    KlEvolving {
        scaled_modes: Vec<Vec<f64>>,
    },
}

impl PreparedForcing1D {
    /// Fill `out` with `g(x_j, t; ξ)` over the grid nodes. Entries at the
    /// two boundary nodes are not meaningful for the manufactured variants.
    pub fn eval_into(&self, t: f64, xi: &[f64], out: &mut [f64]) {
        match self {
            PreparedForcing1D::Zero => out.fill(0.0),
            PreparedForcing1D::Cross { bump, sin1, sin2, riesz_bump, riesz_sin1, riesz_sin2 } => {
                let z1 = 2.0 * xi[0] - 1.0;
                let z2 = 2.0 * xi[1] - 1.0;
                let s3 = 3.0f64.sqrt();
                let c_mean = 100.0 * (0.5 * t + std::f64::consts::FRAC_PI_4).sin();
                let dt_mean = 50.0 * (0.5 * t + std::f64::consts::FRAC_PI_4).cos();
                let c1 = -s3 * (1.5 + t.sin()) * z1;
                let dt1 = -s3 * t.cos() * z1;
                let c2 = s3 * (1.5 + (3.0 * t).cos()) * z2;
                let dt2 = -3.0 * s3 * (3.0 * t).sin() * z2;
                for j in 0..out.len() {
                    let u = c_mean * bump[j] + c1 * sin1[j] + c2 * sin2[j];
                    let ut = dt_mean * bump[j] + dt1 * sin1[j] + dt2 * sin2[j];
                    let du = c_mean * riesz_bump[j] + c1 * riesz_sin1[j] + c2 * riesz_sin2[j];
                    out[j] = ut - du - u * (1.0 - u * u);
                }
            }
            PreparedForcing1D::AppD { bump, riesz_bump } => {
                let c = 100.0 * (-t).exp();
                for j in 0..out.len() {
                    let u = c * bump[j];
                    out[j] = -u - c * riesz_bump[j] - u * (1.0 - u * u);
                }
            }
            PreparedForcing1D::KlStatic { mean, scaled_modes } => {
                out.copy_from_slice(mean);
                for (m, &z) in scaled_modes.iter().zip(xi) {
                    for j in 0..out.len() {
                        out[j] += m[j] * z;
                    }
                }
            }
            PreparedForcing1D::KlEvolving { scaled_modes } => {
                for o in out.iter_mut() {
                    *o = 1.0;
                }
                for (i, (m, &z)) in scaled_modes.iter().zip(xi).enumerate() {
                    let env = evolving_envelope(i, t);
                    for j in 0..out.len() {
                        out[j] += env * m[j] * z;
                    }
                }
            }
        }
    }
}

/// Reaction-coefficient field `K(x;ξ)` multiplying the nonlinearity.
#[derive(Clone, Copy, Debug)]
pub enum ReactionCoeff {
    One,
    /// `K₀ (1 + σ ξ_k)` with `ξ_k` the random coordinate at `xi_index`.
    RandomScale { k0: f64, sigma: f64, xi_index: usize },
}

impl ReactionCoeff {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            ReactionCoeff::One => 1.0,
            ReactionCoeff::RandomScale { k0, sigma, xi_index } => {
                k0 * (1.0 + sigma * xi[*xi_index])
            }
        }
    }
}

/// 2D forcing descriptors.
#[derive(Clone, Debug)]
pub enum Forcing2D {
    /// Identically zero.
    Zero,
    /// Cosine double expansion
    /// `g = 1 + 3 Σ_{i≤j} √(v_i v_j) φ_i(x₁) φ_j(x₂) ξ_{ij}` with
    /// `v_0 = 1/2, φ_0 = 1, v_i = exp(-π i² l²)/2, φ_i = √2 cos(iπx)`.
    CosineExpansion { l: f64, p1: usize, p2: usize },
    /// Discrete-manufactured forcing so that `e^{-t} sin(2πx₁) sin(2πx₂)`
    /// solves the grid equations exactly in space.
    MmsDiscrete { alpha: f64, beta: f64 },
}

impl Forcing2D {
    pub fn xi_dim(&self) -> usize {
        match self {
            Forcing2D::Zero => 0,
            Forcing2D::CosineExpansion { p1, p2, .. } => {
                (0..=*p1).map(|i| p2.saturating_sub(i) + 1).sum()
            }
            Forcing2D::MmsDiscrete { .. } => 0,
        }
    }
}
