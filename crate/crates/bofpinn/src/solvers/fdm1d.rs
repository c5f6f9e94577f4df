//! Deterministic fractional finite differences in 1D.
//!
//! Crank-Nicolson on the linear fractional part (dense LU, factored once)
//! with second-order Adams-Bashforth extrapolation of the nonlinear reaction
//! and forcing. Unknowns are the interior nodes; boundary values stay pinned
//! at zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracops::{GlOrder, GlStencil, Grid1D};
use crate::problems::{PreparedForcing1D, Problem1D};

#[derive(Clone, Debug)]
pub struct FdmOptions {
    pub grid: Grid1D,
    pub dt: f64,
    pub order: GlOrder,
    /// Times at which to record the field (snapped to the nearest step).
    pub out_times: Vec<f64>,
}

/// Solution snapshots on the full node set.
#[derive(Clone, Debug)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
}

impl FieldTrajectory {
    pub fn last(&self) -> &[f64] {
        self.fields.last().expect("trajectory has at least the initial field")
    }

    /// Field recorded nearest to `t`.
    pub fn at(&self, t: f64) -> &[f64] {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        &self.fields[best]
    }
}

/// Shared implicit machinery for one (grid, α, μ, Δt) combination.
pub struct CnOperator {
    pub stencil: GlStencil,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    explicit: DMatrix<f64>,
}

impl CnOperator {
    pub fn new(grid: Grid1D, alpha: f64, mu: f64, dt: f64, order: GlOrder) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::InvalidArg(format!("time step must be positive, got {dt}")));
        }
        let stencil = GlStencil::new(grid, alpha, order)?;
        let ni = grid.n_interior();
        // restrict to interior columns: boundary values are identically zero
        let l = DMatrix::from_fn(ni, ni, |i, j| mu * stencil.matrix().get(i, j + 1));
        let a = DMatrix::identity(ni, ni) - &l * (dt / 2.0);
        let explicit = DMatrix::identity(ni, ni) + &l * (dt / 2.0);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-300 {
            return Err(Error::LinearSolve("singular Crank-Nicolson matrix".into()));
        }
        Ok(Self { stencil, lu, explicit })
    }

    pub fn step_matrixfree(&self, u: &DVector<f64>, forcing_terms: &DVector<f64>) -> Result<DVector<f64>> {
        let rhs = &self.explicit * u + forcing_terms;
        self.lu
            .solve(&rhs)
            .ok_or_else(|| Error::LinearSolve("Crank-Nicolson solve failed".into()))
    }
}

/// Solve one deterministic instance (fixed ξ).
pub fn fdm_solve_1d(problem: &Problem1D, xi: &[f64], opts: &FdmOptions) -> Result<FieldTrajectory> {
    let prepared = problem.forcing.prepare(&opts.grid);
    let op = CnOperator::new(opts.grid, problem.alpha, problem.mu, opts.dt, opts.order)?;
    fdm_solve_prepared(problem, xi, opts, &prepared, &op)
}

/// Same, with forcing and operator prepared once by the caller (used by the
/// ensemble drivers).
pub fn fdm_solve_prepared(
    problem: &Problem1D,
    xi: &[f64],
    opts: &FdmOptions,
    prepared: &PreparedForcing1D,
    op: &CnOperator,
) -> Result<FieldTrajectory> {
    let grid = &opts.grid;
    let ni = grid.n_interior();
    let n_steps = (problem.t_end / opts.dt).round() as usize;
    let record_steps: Vec<usize> = opts
        .out_times
        .iter()
        .map(|&t| ((t / opts.dt).round() as usize).min(n_steps))
        .collect();

    let kappa = problem.epsilon * problem.reaction.eval(xi);
    let mut g = vec![0.0; grid.n_nodes()];
    let mut u = DVector::from_fn(ni, |i, _| problem.ic.eval(grid.node(i + 1), xi));
    let mut f_prev: Option<DVector<f64>> = None;

    let eval_f = |u: &DVector<f64>, t: f64, g: &mut Vec<f64>| -> DVector<f64> {
        prepared.eval_into(t, xi, g);
        DVector::from_fn(ni, |i, _| kappa * problem.nonlinearity.eval(u[i]) + g[i + 1])
    };

    let mut out = FieldTrajectory { times: Vec::new(), fields: Vec::new() };
    let mut record = |step: usize, u: &DVector<f64>| {
        if record_steps.contains(&step) {
            let mut field = vec![0.0; grid.n_nodes()];
            for i in 0..ni {
                field[i + 1] = u[i];
            }
            out.times.push(step as f64 * opts.dt);
            out.fields.push(field);
        }
    };
    record(0, &u);

    for step in 0..n_steps {
        let t = step as f64 * opts.dt;
        let f_now = eval_f(&u, t, &mut g);
        // AB2 extrapolation of the explicit part to the half step
        let fx = match &f_prev {
            Some(fp) => (&f_now * 1.5 - fp * 0.5) * opts.dt,
            None => &f_now * opts.dt,
        };
        u = op.step_matrixfree(&u, &fx)?;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged { iter: step, what: "FDM field became non-finite".into() });
        }
        f_prev = Some(f_now);
        record(step + 1, &u);
    }
    Ok(out)
}

/// Relative L² distance between two fields on the same grid.
pub fn rel_l2_field(candidate: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = candidate
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = reference.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{benchmarks, exact, Forcing1D, Ic1D, Nonlinearity};

    #[test]
    fn zero_data_stays_zero() {
        let mut p = benchmarks::appendix_d(1.5);
        p.forcing = Forcing1D::Zero;
        p.ic = Ic1D::Zero;
        p.nonlinearity = Nonlinearity::None;
        let grid = Grid1D::new(0.0, 1.0, 32).unwrap();
        let opts = FdmOptions { grid, dt: 1e-3, order: GlOrder::Second, out_times: vec![0.5, 1.0] };
        let run = fdm_solve_1d(&p, &[], &opts).unwrap();
        for f in &run.fields {
            assert!(f.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_bad_time_step() {
        let p = benchmarks::appendix_d(1.5);
        let grid = Grid1D::new(0.0, 1.0, 16).unwrap();
        let opts = FdmOptions { grid, dt: 0.0, order: GlOrder::Second, out_times: vec![] };
        assert!(fdm_solve_1d(&p, &[], &opts).is_err());
    }

    #[test]
    fn manufactured_solution_accuracy_and_convergence() {
        // relative L² <= 1e-3 at t=1 for N=512, and the error ratio between
        // N=128 and N=256 is second order (4.0 ± 0.8)
        let p = benchmarks::appendix_d(1.5);
        let mut errs = Vec::new();
        for n in [128usize, 256, 512] {
            let grid = Grid1D::new(0.0, 1.0, n).unwrap();
            let opts =
                FdmOptions { grid, dt: 1e-3, order: GlOrder::Second, out_times: vec![1.0] };
            let run = fdm_solve_1d(&p, &[], &opts).unwrap();
            let exact: Vec<f64> =
                grid.nodes().iter().map(|&x| exact::appd::solution(x, 1.0)).collect();
            errs.push(rel_l2_field(run.last(), &exact));
        }
        assert!(errs[2] <= 1e-3, "N=512 error {}", errs[2]);
        let ratio = errs[0] / errs[1];
        assert!((3.2..=4.8).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn energy_decays_without_forcing() {
        let mut p = benchmarks::appendix_d(1.5);
        p.forcing = Forcing1D::Zero;
        p.ic = Ic1D::SinPi;
        p.epsilon = 0.0;
        let grid = Grid1D::new(0.0, 1.0, 64).unwrap();
        let out_times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let opts = FdmOptions { grid, dt: 1e-3, order: GlOrder::Second, out_times };
        let run = fdm_solve_1d(&p, &[], &opts).unwrap();
        let energy = |f: &[f64]| grid.inner(f, f);
        for w in run.fields.windows(2) {
            assert!(energy(&w[1]) <= energy(&w[0]) * (1.0 + 1e-12));
        }
        // strictly dissipating, not just non-increasing
        assert!(energy(run.last()) < 0.9 * energy(&run.fields[0]));
    }
}
