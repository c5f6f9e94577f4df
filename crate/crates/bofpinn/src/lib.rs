//! Solvers for time-dependent stochastic fractional PDEs.
//!
//! The central method expands the random solution bi-orthogonally — a mean
//! field plus scaled spatial modes times stochastic coefficients — puts each
//! component behind a neural surrogate, and trains against a weak-form
//! physics loss in which Riesz fractional derivatives are discretized by
//! shifted Grünwald-Letnikov stencils on a grid. Classical references
//! (fractional finite differences, quasi-Monte-Carlo ensembles, and the
//! hybrid QMC/bi-orthogonal evolution solver) live alongside for validation.
//!
//! Entry points:
//! - [`autodiff`] / [`nn`] / [`optim`]: tape-based reverse-mode AD, dense
//!   networks, Adam and L-BFGS.
//! - [`fracops`]: Grünwald-Letnikov stencils and analytic fractional
//!   derivative series used as oracles.
//! - [`stochastic`]: covariance kernels, Karhunen-Loève decomposition,
//!   Gauss-Legendre and Sobol point sets.
//! - [`problems`] / [`solvers`]: benchmark problem definitions and the
//!   classical reference solvers.
//! - [`fpinn`] / [`surrogate`]: the deterministic fractional PINN and the
//!   four-network bi-orthogonal surrogate with its composite loss.
//! - [`harness`]: config-driven experiment runner behind the CLI.

pub mod autodiff;
pub mod error;
pub mod fpinn;
pub mod fracops;
pub mod harness;
pub mod nn;
pub mod optim;
pub mod problems;
pub mod solvers;
pub mod stochastic;
pub mod surrogate;
pub mod tensor;

pub use error::{Error, Result};
