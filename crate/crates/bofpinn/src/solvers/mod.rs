//! Classical reference solvers: deterministic fractional finite differences
//! (1D and ADI 2D), quasi-Monte-Carlo ensembles, and the hybrid QMC /
//! bi-orthogonal evolution solver.

mod adi2d;
mod bo;
mod fdm1d;
mod qmc;

pub use adi2d::{fdm_solve_2d_adi, ic_field_2d, Adi2dOptions, Field2dTrajectory};
pub use bo::{
    ab3_combine, bo_rhs, bo_step_ab3, kl_restart, qmc_bo_solve, BoContext, BoDeriv, BoSnapshot,
    BoState, QmcBoOptions, QmcBoRun,
};
pub use fdm1d::{fdm_solve_1d, fdm_solve_prepared, rel_l2_field, CnOperator, FdmOptions, FieldTrajectory};
pub use qmc::{ensemble_trajectories, qmc_ensemble_solve, EnsembleStats};
