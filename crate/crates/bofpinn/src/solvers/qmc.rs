//! Quasi-Monte-Carlo ensembles of deterministic solves.
//!
//! Per-sample solves run in parallel; statistics are reduced sequentially in
//! sample order so results are bitwise independent of the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::Problem1D;
use crate::stochastic::SampleSet;
use crate::tensor::Tensor;

use super::fdm1d::{fdm_solve_prepared, CnOperator, FdmOptions, FieldTrajectory};

/// Weighted mean and variance fields per output time.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

impl EnsembleStats {
    pub fn at(&self, t: f64) -> (&[f64], &[f64]) {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        (&self.mean[best], &self.var[best])
    }

    /// Weighted statistics over column-per-sample fields.
    pub fn from_fields(t: f64, fields: &Tensor, weights: &[f64]) -> Self {
        let (n_nodes, n_samples) = fields.shape();
        assert_eq!(n_samples, weights.len());
        let mut mean = vec![0.0; n_nodes];
        for l in 0..n_samples {
            for j in 0..n_nodes {
                mean[j] += weights[l] * fields.get(j, l);
            }
        }
        let mut var = vec![0.0; n_nodes];
        for l in 0..n_samples {
            for j in 0..n_nodes {
                let d = fields.get(j, l) - mean[j];
                var[j] += weights[l] * d * d;
            }
        }
        Self { times: vec![t], mean: vec![mean], var: vec![var] }
    }
}

/// All per-sample trajectories (parallel, order-preserving).
pub fn ensemble_trajectories(
    problem: &Problem1D,
    samples: &SampleSet,
    opts: &FdmOptions,
) -> Result<Vec<FieldTrajectory>> {
    if problem.xi_dim() > 0 && samples.dim < problem.xi_dim() {
        return Err(Error::Shape(format!(
            "samples have dimension {}, problem needs {}",
            samples.dim,
            problem.xi_dim()
        )));
    }
    let prepared = problem.forcing.prepare(&opts.grid);
    let op = CnOperator::new(opts.grid, problem.alpha, problem.mu, opts.dt, opts.order)?;
    let runs: Vec<Result<FieldTrajectory>> = (0..samples.len())
        .into_par_iter()
        .map(|l| {
            fdm_solve_prepared(problem, samples.point(l), opts, &prepared, &op)
                .map_err(|e| Error::InvalidArg(format!("sample {l}: {e}")))
        })
        .collect();
    runs.into_iter().collect()
}

/// Weighted mean/variance of per-sample deterministic solves at each
/// requested output time.
pub fn qmc_ensemble_solve(
    problem: &Problem1D,
    samples: &SampleSet,
    opts: &FdmOptions,
) -> Result<EnsembleStats> {
    let runs = ensemble_trajectories(problem, samples, opts)?;
    let n_out = runs[0].times.len();
    let n_nodes = opts.grid.n_nodes();
    let mut stats = EnsembleStats {
        times: runs[0].times.clone(),
        mean: vec![vec![0.0; n_nodes]; n_out],
        var: vec![vec![0.0; n_nodes]; n_out],
    };
    for (l, run) in runs.iter().enumerate() {
        let w = samples.weights[l];
        for k in 0..n_out {
            for j in 0..n_nodes {
                stats.mean[k][j] += w * run.fields[k][j];
            }
        }
    }
    for (l, run) in runs.iter().enumerate() {
        let w = samples.weights[l];
        for k in 0..n_out {
            for j in 0..n_nodes {
                let d = run.fields[k][j] - stats.mean[k][j];
                stats.var[k][j] += w * d * d;
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{GlOrder, Grid1D};
    use crate::problems::{benchmarks, exact};
    use crate::stochastic::{gauss_legendre_rule, tensor_quadrature, SampleSet};

    #[test]
    fn deterministic_forcing_has_zero_variance() {
        let p = benchmarks::appendix_d(1.5);
        // several "samples" of a zero-dimensional random space
        let samples = SampleSet {
            dim: 0,
            points: Tensor::zeros(4, 0),
            weights: vec![0.25; 4],
            tag: "const".into(),
            seed: 0,
        };
        let grid = Grid1D::new(0.0, 1.0, 32).unwrap();
        let opts = FdmOptions { grid, dt: 1e-2, order: GlOrder::Second, out_times: vec![0.5] };
        let stats = qmc_ensemble_solve(&p, &samples, &opts).unwrap();
        assert!(stats.var[0].iter().all(|&v| v <= 1e-20));
    }

    #[test]
    fn crossing_benchmark_variance_at_final_time() {
        // Gauss 8×8 in ξ integrates the degree-≤6 polynomial statistics
        // exactly, so the only errors are FDM discretization.
        let mut p = benchmarks::manufactured_cross(1.5, 50);
        p.t_end = std::f64::consts::PI;
        let r8 = gauss_legendre_rule(8, 0.0, 1.0).unwrap();
        let rule = tensor_quadrature(&[r8.clone(), r8]).unwrap();
        let samples = SampleSet::from_quadrature(&rule);
        let grid = Grid1D::new(0.0, 1.0, 64).unwrap();
        let opts = FdmOptions {
            grid,
            dt: 1e-3,
            order: GlOrder::Second,
            out_times: vec![std::f64::consts::PI],
        };
        let stats = qmc_ensemble_solve(&p, &samples, &opts).unwrap();
        let (_, var) = stats.at(std::f64::consts::PI);
        let j_mid = 32;
        let expect = exact::cross::variance(0.5, std::f64::consts::PI);
        assert!(
            (var[j_mid] - expect).abs() / expect < 0.03,
            "variance {} vs {expect}",
            var[j_mid]
        );
    }
}
