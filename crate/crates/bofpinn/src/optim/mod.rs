//! Optimizers operating on flat parameter vectors.

mod adam;
mod lbfgs;

pub use adam::{AdamConfig, AdamState};
pub use lbfgs::{lbfgs_minimize, LbfgsConfig, LbfgsReport, StopReason};
