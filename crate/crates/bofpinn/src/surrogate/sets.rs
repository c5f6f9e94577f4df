//! Training point sets: grid-aligned spatial nodes, fixed uniform temporal
//! draws, and a weighted stochastic sample set.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fracops::Grid1D;
use crate::problems::Problem1D;
use crate::stochastic::{
    gauss_legendre_rule, low_discrepancy_points, tensor_quadrature, SampleSet,
};

/// How the expectation over ξ is discretized.
#[derive(Clone, Copy, Debug)]
pub enum XiStrategy {
    /// Tensor Gauss-Legendre, `n` points per axis (bounded laws, small d).
    GaussTensor { n_per_axis: usize },
    /// Equal-weight pseudo-random samples.
    MonteCarlo { count: usize },
    /// Equal-weight scrambled Sobol samples.
    Qmc { count: usize },
}

#[derive(Clone, Debug)]
pub struct TrainingSets {
    pub grid: Grid1D,
    pub t0: f64,
    pub t1: f64,
    pub t_nodes: Vec<f64>,
    pub xi: SampleSet,
}

impl TrainingSets {
    /// Build sets for a problem: `n_t` uniform temporal draws on
    /// `(t0, t1)` (seeded, fixed thereafter so quasi-Newton phases see a
    /// deterministic objective) and the requested stochastic rule.
    pub fn build(
        problem: &Problem1D,
        grid: Grid1D,
        t_span: (f64, f64),
        n_t: usize,
        strategy: XiStrategy,
        seed: u64,
    ) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::InvalidArg("need at least one temporal point".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e09_11d5);
        let mut t_nodes: Vec<f64> =
            (0..n_t).map(|_| rng.gen_range(t_span.0..t_span.1)).collect();
        t_nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let d = problem.xi_dim().max(1);
        let xi = match strategy {
            XiStrategy::GaussTensor { n_per_axis } => {
                let (lo, hi) = problem.law.support().ok_or_else(|| {
                    Error::InvalidArg(
                        "tensor quadrature needs a bounded law; use MonteCarlo".into(),
                    )
                })?;
                if d > 3 {
                    return Err(Error::InvalidArg(format!(
                        "tensor quadrature in {d} dimensions would be wasteful; use MonteCarlo"
                    )));
                }
                let rule1 = gauss_legendre_rule(n_per_axis, lo, hi)?;
                let rules = vec![rule1; d];
                SampleSet::from_quadrature(&tensor_quadrature(&rules)?)
            }
            XiStrategy::MonteCarlo { count } => {
                SampleSet::pseudo_random(problem.law, d, count, seed)?
            }
            XiStrategy::Qmc { count } => {
                low_discrepancy_points(d, count, Some(seed))?.mapped_to(problem.law)
            }
        };
        Ok(Self { grid, t0: t_span.0, t1: t_span.1, t_nodes, xi })
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_interior()
    }

    pub fn n_t(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn n_xi(&self) -> usize {
        self.xi.len()
    }

    /// Restrict to a sub-window in time, redrawing temporal points with the
    /// same seed discipline.
    pub fn window(&self, t0: f64, t1: f64, n_t: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e09_11d5);
        let mut t_nodes: Vec<f64> = (0..n_t).map(|_| rng.gen_range(t0..t1)).collect();
        t_nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { grid: self.grid, t0, t1, t_nodes, xi: self.xi.clone() }
    }
}
