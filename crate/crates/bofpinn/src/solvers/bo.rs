//! Classical bi-orthogonal evolution equations and the hybrid
//! quasi-Monte-Carlo / bi-orthogonal solver.
//!
//! The random solution is carried as `u = ū + Σ u_i Y_i` with scaled spatial
//! modes (`⟨u_i,u_j⟩ = λ_i δ_ij`) and orthonormal zero-mean stochastic
//! coefficients (`E[Y_i Y_j] = δ_ij`). With `F = N[u] + g`,
//!
//! ```text
//!   ∂ū/∂t  = E[F]
//!   ∂u_i/∂t = -Σ_j M_ij u_j + E[F Y_i]
//!   λ_i dY_i/dt = -Σ_j S_ij Y_j + ⟨F - E[F], u_i⟩
//! ```
//!
//! where `G_ij = ⟨E[F Y_j], u_i⟩`, `M_ij = (G_ij+G_ji)/(λ_j-λ_i)` off the
//! diagonal (zero on it), and `S_ij = G_ij + λ_i M_ij` (`S_ii = G_ii`). The
//! closed forms blow up when eigenvalues cross; the solver detects a
//! collapsing gap and aborts with the crossing time, which is the documented
//! breakdown this method suffers from and the neural variant avoids.
//!
//! Expectations use the ensemble's own samples and weights; inner products
//! use the composite trapezoid rule. Time stepping is third-order
//! Adams-Bashforth, bootstrapped by two classical Runge-Kutta steps, with
//! λ refreshed from `⟨u_i,u_i⟩` after every update.

use crate::error::{Error, Result};
use crate::fracops::{GlOrder, GlStencil, Grid1D};
use crate::problems::{PreparedForcing1D, Problem1D};
use crate::stochastic::{kl_decompose, low_discrepancy_points, SampleSet};
use crate::tensor::Tensor;

use super::fdm1d::FdmOptions;
use super::qmc::{ensemble_trajectories, EnsembleStats};

/// Bi-orthogonal solution snapshot.
#[derive(Clone, Debug)]
pub struct BoState {
    pub t: f64,
    pub grid: Grid1D,
    /// Mean field on all nodes.
    pub mean: Vec<f64>,
    /// Scaled spatial modes, `⟨u_i,u_i⟩ = λ_i`.
    pub modes: Vec<Vec<f64>>,
    /// Stochastic coefficients, `n_samples × N`.
    pub coeffs: Tensor,
    pub lambdas: Vec<f64>,
}

impl BoState {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Reconstruct all ensemble members, nodes × samples.
    pub fn reconstruct(&self) -> Tensor {
        let n_nodes = self.mean.len();
        let n_samples = self.coeffs.rows();
        let mut out = Tensor::zeros(n_nodes, n_samples);
        for l in 0..n_samples {
            for j in 0..n_nodes {
                let mut v = self.mean[j];
                for (i, mode) in self.modes.iter().enumerate() {
                    v += mode[j] * self.coeffs.get(l, i);
                }
                out.set(j, l, v);
            }
        }
        out
    }

    /// Scale factors `a_i = √λ_i`.
    pub fn scale_factors(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.sqrt()).collect()
    }

    fn axpy(&mut self, c: f64, d: &BoDeriv) {
        for (m, dm) in self.mean.iter_mut().zip(&d.dmean) {
            *m += c * dm;
        }
        for (mode, dmode) in self.modes.iter_mut().zip(&d.dmodes) {
            for (v, dv) in mode.iter_mut().zip(dmode) {
                *v += c * dv;
            }
        }
        self.coeffs.axpy(c, &d.dcoeffs);
    }

    fn refresh_lambdas(&mut self) {
        for (i, mode) in self.modes.iter().enumerate() {
            self.lambdas[i] = self.grid.inner(mode, mode);
        }
    }
}

/// Time derivatives plus the evolution matrices.
#[derive(Clone, Debug)]
pub struct BoDeriv {
    pub dmean: Vec<f64>,
    pub dmodes: Vec<Vec<f64>>,
    pub dcoeffs: Tensor,
    pub g: Tensor,
    pub s: Tensor,
    pub m: Tensor,
}

/// Everything a right-hand-side evaluation needs besides the state.
pub struct BoContext<'a> {
    pub problem: &'a Problem1D,
    pub forcing: &'a PreparedForcing1D,
    pub stencil: &'a GlStencil,
    pub samples: &'a SampleSet,
    /// Abort when `|λ_i - λ_j| < gap_tol_rel · max λ`.
    pub gap_tol_rel: f64,
}

/// Evaluate the BO evolution right-hand side; errors on eigenvalue crossing.
pub fn bo_rhs(state: &BoState, ctx: &BoContext<'_>) -> Result<BoDeriv> {
    let n = state.n_modes();
    let grid = &state.grid;
    let ni = grid.n_interior();
    let n_nodes = grid.n_nodes();
    let n_samples = ctx.samples.len();
    let dx = grid.dx();

    let lam_max = state.lambdas.iter().cloned().fold(0.0f64, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            let gap = (state.lambdas[i] - state.lambdas[j]).abs();
            if gap < ctx.gap_tol_rel * lam_max {
                return Err(Error::Crossing { t: state.t, i, j, gap });
            }
        }
    }

    // fractional term of mean and modes (linearity in the expansion)
    let d_mean = ctx.stencil.apply(&state.mean)?;
    let d_modes: Vec<Vec<f64>> = state
        .modes
        .iter()
        .map(|m| ctx.stencil.apply(m))
        .collect::<Result<_>>()?;

    // per-sample F = μ D u + ε K f(u) + g on interior nodes
    let mut f = Tensor::zeros(ni, n_samples);
    let mut gbuf = vec![0.0; n_nodes];
    for l in 0..n_samples {
        let xi = ctx.samples.point(l);
        ctx.forcing.eval_into(state.t, xi, &mut gbuf);
        let kappa = ctx.problem.epsilon * ctx.problem.reaction.eval(xi);
        for k in 0..ni {
            let mut u = state.mean[k + 1];
            let mut du = d_mean[k];
            for (i, mode) in state.modes.iter().enumerate() {
                let y = state.coeffs.get(l, i);
                u += mode[k + 1] * y;
                du += d_modes[i][k] * y;
            }
            let v = ctx.problem.mu * du
                + kappa * ctx.problem.nonlinearity.eval(u)
                + gbuf[k + 1];
            f.set(k, l, v);
        }
    }

    // E[F], and P[:,i] = E[F Y_i]
    let w = &ctx.samples.weights;
    let mut ef = vec![0.0; ni];
    for l in 0..n_samples {
        for k in 0..ni {
            ef[k] += w[l] * f.get(k, l);
        }
    }
    let wy = Tensor::from_fn(n_samples, n, |l, i| w[l] * state.coeffs.get(l, i));
    let p = f.matmul(&wy); // ni × n

    // G_ij = ⟨E[F Y_j], u_i⟩ (trapezoid; boundary terms vanish)
    let g = Tensor::from_fn(n, n, |i, j| {
        (0..ni).map(|k| dx * p.get(k, j) * state.modes[i][k + 1]).sum()
    });

    let mut m = Tensor::zeros(n, n);
    let mut s = Tensor::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                s.set(i, i, g.get(i, i));
            } else {
                let mij = (g.get(i, j) + g.get(j, i)) / (state.lambdas[j] - state.lambdas[i]);
                m.set(i, j, mij);
                s.set(i, j, g.get(i, j) + state.lambdas[i] * mij);
            }
        }
    }

    // dū: interior from E[F], boundary pinned
    let mut dmean = vec![0.0; n_nodes];
    dmean[1..=ni].copy_from_slice(&ef);

    // du_i = -Σ_j M_ij u_j + E[F Y_i]
    let mut dmodes = vec![vec![0.0; n_nodes]; n];
    for i in 0..n {
        for k in 0..ni {
            let mut v = p.get(k, i);
            for j in 0..n {
                v -= m.get(i, j) * state.modes[j][k + 1];
            }
            dmodes[i][k + 1] = v;
        }
    }

    // λ_i dY_i/dt = -Σ_j S_ij Y_j + ⟨F_l - E[F], u_i⟩
    let mut dcoeffs = Tensor::zeros(n_samples, n);
    for l in 0..n_samples {
        for i in 0..n {
            let mut v = 0.0;
            for k in 0..ni {
                v += dx * (f.get(k, l) - ef[k]) * state.modes[i][k + 1];
            }
            for j in 0..n {
                v -= s.get(i, j) * state.coeffs.get(l, j);
            }
            dcoeffs.set(l, i, v / state.lambdas[i]);
        }
    }

    Ok(BoDeriv { dmean, dmodes, dcoeffs, g, s, m })
}

/// Third-order Adams-Bashforth combination `y += dt/12 (23 f₀ - 16 f₁ + 5 f₂)`
/// over flat slices (exposed for its own convergence tests).
pub fn ab3_combine(y: &mut [f64], dt: f64, f0: &[f64], f1: &[f64], f2: &[f64]) {
    for i in 0..y.len() {
        y[i] += dt / 12.0 * (23.0 * f0[i] - 16.0 * f1[i] + 5.0 * f2[i]);
    }
}

/// Advance a BO state by one AB3 step given the three most recent derivative
/// evaluations (`hist[0]` newest). Refreshes λ from the updated modes.
pub fn bo_step_ab3(state: &mut BoState, hist: &[&BoDeriv; 3], dt: f64) {
    state.axpy(dt * 23.0 / 12.0, hist[0]);
    state.axpy(-dt * 16.0 / 12.0, hist[1]);
    state.axpy(dt * 5.0 / 12.0, hist[2]);
    state.t += dt;
    state.refresh_lambdas();
}

fn rk4_step(state: &BoState, ctx: &BoContext<'_>, dt: f64) -> Result<BoState> {
    let k1 = bo_rhs(state, ctx)?;
    let mut s2 = state.clone();
    s2.axpy(dt / 2.0, &k1);
    s2.t += dt / 2.0;
    s2.refresh_lambdas();
    let k2 = bo_rhs(&s2, ctx)?;
    let mut s3 = state.clone();
    s3.axpy(dt / 2.0, &k2);
    s3.t += dt / 2.0;
    s3.refresh_lambdas();
    let k3 = bo_rhs(&s3, ctx)?;
    let mut s4 = state.clone();
    s4.axpy(dt, &k3);
    s4.t += dt;
    s4.refresh_lambdas();
    let k4 = bo_rhs(&s4, ctx)?;
    let mut out = state.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out.t += dt;
    out.refresh_lambdas();
    Ok(out)
}

/// Build a BO state from ensemble fields (`nodes × samples`) by a discrete
/// KL decomposition of the sample covariance. `Y_i = ⟨u-ū, v_i⟩/√λ_i`.
pub fn kl_restart(
    grid: Grid1D,
    t: f64,
    fields: &Tensor,
    weights: &[f64],
    n_modes: usize,
) -> Result<BoState> {
    let (n_nodes, n_samples) = fields.shape();
    if n_nodes != grid.n_nodes() {
        return Err(Error::Shape(format!(
            "{} field nodes vs {} grid nodes",
            n_nodes,
            grid.n_nodes()
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArg("empty ensemble".into()));
    }
    let mut mean = vec![0.0; n_nodes];
    for l in 0..n_samples {
        for j in 0..n_nodes {
            mean[j] += weights[l] * fields.get(j, l);
        }
    }
    // weighted sample covariance C(x_j, x_k)
    let mut cov = Tensor::zeros(n_nodes, n_nodes);
    for l in 0..n_samples {
        let w = weights[l];
        for j in 0..n_nodes {
            let dj = fields.get(j, l) - mean[j];
            if dj == 0.0 {
                continue;
            }
            for k in 0..n_nodes {
                let v = cov.get(j, k) + w * dj * (fields.get(k, l) - mean[k]);
                cov.set(j, k, v);
            }
        }
    }
    let trap = grid.trapezoid_weights();
    let basis = kl_decompose(&cov, &trap, n_nodes)?;
    let lam1 = basis.lambdas.first().copied().unwrap_or(0.0);
    if lam1 <= 0.0 {
        return Err(Error::InvalidArg("zero-variance ensemble".into()));
    }
    let attainable = basis.lambdas.iter().filter(|&&l| l > 1e-12 * lam1).count();
    if n_modes > attainable {
        return Err(Error::InvalidArg(format!(
            "requested {n_modes} modes but the ensemble spectrum supports only {attainable}"
        )));
    }

    let mut modes = Vec::with_capacity(n_modes);
    let mut coeffs = Tensor::zeros(n_samples, n_modes);
    for i in 0..n_modes {
        let lam = basis.lambdas[i];
        let v = &basis.phis[i];
        modes.push(v.iter().map(|&x| lam.sqrt() * x).collect::<Vec<f64>>());
        for l in 0..n_samples {
            let mut ip = 0.0;
            for j in 0..n_nodes {
                ip += trap[j] * (fields.get(j, l) - mean[j]) * v[j];
            }
            coeffs.set(l, i, ip / lam.sqrt());
        }
    }
    Ok(BoState {
        t,
        grid,
        mean,
        modes,
        coeffs,
        lambdas: basis.lambdas[..n_modes].to_vec(),
    })
}

#[derive(Clone, Debug)]
pub struct QmcBoOptions {
    pub grid: Grid1D,
    pub order: GlOrder,
    /// Switch time between the ensemble phase and the BO evolution.
    pub t_switch: f64,
    pub dt_qmc: f64,
    pub dt_bo: f64,
    pub n_samples: usize,
    pub n_modes: usize,
    pub seed: u64,
    pub gap_tol_rel: f64,
    pub out_times: Vec<f64>,
}

/// One recorded instant of a hybrid run.
#[derive(Clone, Debug)]
pub struct BoSnapshot {
    pub t: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    /// Scaled modes at this time.
    pub modes: Vec<Vec<f64>>,
    pub scale_factors: Vec<f64>,
}

#[derive(Debug)]
pub struct QmcBoRun {
    pub snapshots: Vec<BoSnapshot>,
    pub final_state: BoState,
}

impl QmcBoRun {
    pub fn stats(&self) -> EnsembleStats {
        EnsembleStats {
            times: self.snapshots.iter().map(|s| s.t).collect(),
            mean: self.snapshots.iter().map(|s| s.mean.clone()).collect(),
            var: self.snapshots.iter().map(|s| s.var.clone()).collect(),
        }
    }
}

fn snapshot_of(state: &BoState, weights: &[f64]) -> BoSnapshot {
    let rec = state.reconstruct();
    let stats = EnsembleStats::from_fields(state.t, &rec, weights);
    BoSnapshot {
        t: state.t,
        mean: stats.mean[0].clone(),
        var: stats.var[0].clone(),
        modes: state.modes.clone(),
        scale_factors: state.scale_factors(),
    }
}

/// Hybrid solver: a QMC ensemble integrates the SFPDE from t = 0 to the
/// switch time, a KL decomposition of the ensemble initializes the BO state,
/// and the BO evolution runs to the final time (or aborts on crossing).
pub fn qmc_bo_solve(problem: &Problem1D, opts: &QmcBoOptions) -> Result<QmcBoRun> {
    if opts.t_switch <= 0.0 {
        return Err(Error::InvalidArg(
            "switch time must be positive (the BO system is degenerate at a deterministic start)"
                .into(),
        ));
    }
    let dim = problem.xi_dim().max(1);
    let samples = low_discrepancy_points(dim, opts.n_samples, Some(opts.seed))?
        .mapped_to(problem.law);

    // ensemble phase to the switch time
    let mut qproblem = problem.clone();
    qproblem.t_end = opts.t_switch;
    let fdm = FdmOptions {
        grid: opts.grid,
        dt: opts.dt_qmc,
        order: opts.order,
        out_times: vec![opts.t_switch],
    };
    let runs = ensemble_trajectories(&qproblem, &samples, &fdm)?;
    let mut fields = Tensor::zeros(opts.grid.n_nodes(), samples.len());
    for (l, run) in runs.iter().enumerate() {
        for j in 0..opts.grid.n_nodes() {
            fields.set(j, l, run.at(opts.t_switch)[j]);
        }
    }

    let mut snapshots = Vec::new();
    // pre-switch snapshot straight from the ensemble
    let pre = EnsembleStats::from_fields(opts.t_switch, &fields, &samples.weights);
    let mut state = kl_restart(opts.grid, opts.t_switch, &fields, &samples.weights, opts.n_modes)?;
    snapshots.push(BoSnapshot {
        t: opts.t_switch,
        mean: pre.mean[0].clone(),
        var: pre.var[0].clone(),
        modes: state.modes.clone(),
        scale_factors: state.scale_factors(),
    });

    let prepared = problem.forcing.prepare(&opts.grid);
    let stencil = GlStencil::new(opts.grid, problem.alpha, opts.order)?;
    let ctx = BoContext {
        problem,
        forcing: &prepared,
        stencil: &stencil,
        samples: &samples,
        gap_tol_rel: opts.gap_tol_rel,
    };

    // restart snapshot from the truncated state (mean is identical)
    snapshots.push(snapshot_of(&state, &samples.weights));

    // bootstrap AB3 with two RK4 steps
    let mut hist: Vec<BoDeriv> = vec![bo_rhs(&state, &ctx)?];
    for _ in 0..2 {
        state = rk4_step(&state, &ctx, opts.dt_bo)?;
        hist.insert(0, bo_rhs(&state, &ctx)?);
    }

    let n_steps = ((problem.t_end - state.t) / opts.dt_bo).round() as usize;
    let mut due: Vec<f64> = opts
        .out_times
        .iter()
        .copied()
        .filter(|&t| t > state.t)
        .collect();
    due.sort_by(|a, b| a.partial_cmp(b).unwrap());

    for _ in 0..n_steps {
        bo_step_ab3(&mut state, &[&hist[0], &hist[1], &hist[2]], opts.dt_bo);
        if !state.mean.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged {
                iter: 0,
                what: format!("BO state non-finite at t = {:.4}", state.t),
            });
        }
        while let Some(&t_next) = due.first() {
            if state.t + 1e-12 >= t_next {
                snapshots.push(snapshot_of(&state, &samples.weights));
                due.remove(0);
            } else {
                break;
            }
        }
        let d = bo_rhs(&state, &ctx)?;
        hist.insert(0, d);
        hist.truncate(3);
    }
    if snapshots.last().map(|s| s.t) != Some(state.t) {
        snapshots.push(snapshot_of(&state, &samples.weights));
    }
    Ok(QmcBoRun { snapshots, final_state: state })
}
