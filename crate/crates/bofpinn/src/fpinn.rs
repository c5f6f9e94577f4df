//! Deterministic fractional physics-informed network.
//!
//! One network `u_nn(x,t)`, optionally hard-lifted by the boundary bubble
//! `(x-a)(b-x)` so Dirichlet conditions hold exactly. The loss is the mean
//! squared initial-condition mismatch plus the mean squared strong residual,
//! with the time derivative taken by automatic differentiation and the
//! fractional term by the grid stencil over the full spatial grid at every
//! temporal training point (equation points must sit on grid nodes).

use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{LinMap, Tape, Var};
use crate::error::{Error, Result};
use crate::fracops::{GlOrder, GlStencil, Grid1D};
use crate::nn::{MlpSpec, ParamBinding, ParamStore, TapeMlp};
use crate::optim::{lbfgs_minimize, AdamConfig, AdamState, LbfgsConfig};
use crate::problems::Problem1D;
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct FpinnModel {
    pub spec: MlpSpec,
    pub store: ParamStore,
    /// Hard boundary lifting by `(x-a)(b-x)`.
    pub lift: bool,
    pub grid: Grid1D,
    pub order: GlOrder,
    /// Temporal training points (fixed at setup).
    pub t_nodes: Vec<f64>,
    /// Equation points as interior node indices into the grid.
    pub eq_nodes: Vec<usize>,
}

impl FpinnModel {
    pub fn new(
        grid: Grid1D,
        order: GlOrder,
        hidden_depth: usize,
        hidden_width: usize,
        n_t: usize,
        seed: u64,
        t_end: f64,
    ) -> Self {
        let spec = MlpSpec::hidden(2, hidden_depth, hidden_width, 1);
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec.init_into(&mut store, "u", &mut rng);
        let mut trng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7146);
        let mut t_nodes: Vec<f64> = (0..n_t).map(|_| trng.gen_range(0.0..t_end)).collect();
        t_nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            spec,
            store,
            lift: true,
            grid,
            order,
            t_nodes,
            eq_nodes: (1..grid.n).collect(),
        }
    }

    /// Restrict the equation residual to specific x locations, which must
    /// coincide with interior grid nodes (the stencil is grid-based).
    pub fn with_equation_points(mut self, xs: &[f64]) -> Result<Self> {
        let dx = self.grid.dx();
        let mut nodes = Vec::with_capacity(xs.len());
        for &x in xs {
            let j = ((x - self.grid.a) / dx).round() as isize;
            if j < 1 || j as usize >= self.grid.n || (x - self.grid.node(j as usize)).abs() > 1e-9 {
                return Err(Error::InvalidArg(format!(
                    "equation point {x} is not an interior grid node"
                )));
            }
            nodes.push(j as usize);
        }
        self.eq_nodes = nodes;
        Ok(self)
    }

    fn bubble(&self, x: f64) -> f64 {
        if self.lift {
            (x - self.grid.a) * (self.grid.b - x)
        } else {
            1.0
        }
    }

    /// Lifted surrogate values at arbitrary points.
    pub fn eval(&self, points: &[(f64, f64)]) -> Vec<f64> {
        let x = Tensor::from_fn(points.len(), 2, |i, j| if j == 0 { points[i].0 } else { points[i].1 });
        let y = self.spec.eval(&self.store, "u", &x);
        points
            .iter()
            .enumerate()
            .map(|(i, &(xv, _))| self.bubble(xv) * y.get(i, 0))
            .collect()
    }

    /// Surrogate field on the grid at one time.
    pub fn eval_grid(&self, t: f64) -> Vec<f64> {
        let pts: Vec<(f64, f64)> = self.grid.nodes().iter().map(|&x| (x, t)).collect();
        self.eval(&pts)
    }
}

pub struct FpinnLossParts {
    pub ic: f64,
    pub residual: f64,
    pub total: f64,
}

/// Constant tensors shared across the loss evaluations of one run.
pub struct FpinnWorkspace {
    x_lattice: Tensor,
    tangent: Tensor,
    ic_inputs: Tensor,
    ic_targets: Tensor,
    bubble_tile: Tensor,
    bubble_col_ic: Tensor,
    g_lattice: Tensor,
    stencil_map: Rc<LinMap>,
    selection: Option<Rc<LinMap>>,
    kappa: f64,
    n_nodes: usize,
    n_t: usize,
}

impl FpinnWorkspace {
    pub fn build(model: &FpinnModel, problem: &Problem1D) -> Result<Self> {
        let grid = &model.grid;
        let n_nodes = grid.n_nodes();
        let n_t = model.t_nodes.len();
        if n_t == 0 {
            return Err(Error::InvalidArg("no temporal training points".into()));
        }
        let nodes = grid.nodes();
        let x_lattice = Tensor::from_fn(n_nodes * n_t, 2, |r, c| {
            let (j, s) = (r / n_t, r % n_t);
            if c == 0 {
                nodes[j]
            } else {
                model.t_nodes[s]
            }
        });
        let tangent = Tensor::from_fn(n_nodes * n_t, 2, |_, c| if c == 1 { 1.0 } else { 0.0 });
        let ic_inputs = Tensor::from_fn(n_nodes, 2, |j, c| if c == 0 { nodes[j] } else { 0.0 });
        let ic_targets = Tensor::from_fn(n_nodes, 1, |j, _| problem.ic.eval(nodes[j], &[]));
        let bubble_tile = Tensor::from_fn(n_nodes, n_t, |j, _| model.bubble(nodes[j]));
        let bubble_col_ic = Tensor::from_fn(n_nodes, 1, |j, _| model.bubble(nodes[j]));

        let prepared = problem.forcing.prepare(grid);
        let mut gbuf = vec![0.0; n_nodes];
        let mut g_lattice = Tensor::zeros(model.eq_nodes.len(), n_t);
        for (s, &t) in model.t_nodes.iter().enumerate() {
            prepared.eval_into(t, &[], &mut gbuf);
            for (r, &j) in model.eq_nodes.iter().enumerate() {
                g_lattice.set(r, s, gbuf[j]);
            }
        }

        // stencil restricted to the requested equation rows, scaled by μ
        let stencil = GlStencil::new(*grid, problem.alpha, model.order)?;
        let m = Tensor::from_fn(model.eq_nodes.len(), n_nodes, |r, c| {
            problem.mu * stencil.matrix().get(model.eq_nodes[r] - 1, c)
        });
        let full_interior = model.eq_nodes.len() == n_nodes - 2
            && model.eq_nodes.iter().enumerate().all(|(r, &j)| j == r + 1);
        let selection = if full_interior {
            None
        } else {
            let mut sel = Tensor::zeros(model.eq_nodes.len(), n_nodes);
            for (r, &j) in model.eq_nodes.iter().enumerate() {
                sel.set(r, j, 1.0);
            }
            Some(Rc::new(LinMap { m: sel, dm_dp: None }))
        };
        Ok(Self {
            x_lattice,
            tangent,
            ic_inputs,
            ic_targets,
            bubble_tile,
            bubble_col_ic,
            g_lattice,
            stencil_map: Rc::new(LinMap { m, dm_dp: None }),
            selection,
            kappa: problem.epsilon,
            n_nodes,
            n_t,
        })
    }

    /// Assemble the loss on a tape; returns (total, ic, residual).
    pub fn loss<'t>(
        &self,
        tape: &'t Tape,
        binding: &ParamBinding<'t>,
        model: &FpinnModel,
        problem: &Problem1D,
    ) -> (Var<'t>, Var<'t>, Var<'t>) {
        let net = TapeMlp::bind(binding, "u", &model.spec);

        let x = tape.constant(self.x_lattice.clone());
        let dx = tape.constant(self.tangent.clone());
        let (y, dy) = net.forward_with_tangent(x, dx);
        let u_raw = y.reshape(self.n_nodes, self.n_t);
        let ut_raw = dy.reshape(self.n_nodes, self.n_t);
        let bub = tape.constant(self.bubble_tile.clone());
        let (u, ut) = (u_raw.mul(bub), ut_raw.mul(bub));

        let lu = u.apply_linear(self.stencil_map.clone(), None);
        let n_eq = self.g_lattice.rows();
        let (u_eq, ut_eq) = match &self.selection {
            None => (u.slice_rows(1, n_eq), ut.slice_rows(1, n_eq)),
            Some(sel) => (u.apply_linear(sel.clone(), None), ut.apply_linear(sel.clone(), None)),
        };
        let g = tape.constant(self.g_lattice.clone());
        let mut r = ut_eq.sub(lu).sub(g);
        if let crate::problems::Nonlinearity::CubicReaction = problem.nonlinearity {
            let fu = u_eq.sub(u_eq.square().mul(u_eq)).scale(self.kappa);
            r = r.sub(fu);
        }
        let residual = r.square().mean();

        let xi = tape.constant(self.ic_inputs.clone());
        let u0 = net.forward(xi).mul(tape.constant(self.bubble_col_ic.clone()));
        let ic = u0.sub(tape.constant(self.ic_targets.clone())).square().mean();

        (ic.add(residual), ic, residual)
    }
}

/// Evaluate the loss parts at the model's current parameters.
pub fn fpinn_loss(model: &FpinnModel, problem: &Problem1D) -> Result<FpinnLossParts> {
    let ws = FpinnWorkspace::build(model, problem)?;
    let tape = Tape::new();
    let binding = ParamBinding::bind(&tape, &model.store);
    let (total, ic, residual) = ws.loss(&tape, &binding, model, problem);
    Ok(FpinnLossParts { ic: ic.item(), residual: residual.item(), total: total.item() })
}

#[derive(Clone, Debug)]
pub struct FpinnSchedule {
    pub adam_iters: usize,
    pub adam: AdamConfig,
    pub lbfgs: LbfgsConfig,
}

#[derive(Clone, Debug)]
pub struct FpinnReport {
    pub loss_history: Vec<(usize, f64)>,
    pub final_loss: f64,
    pub iterations: usize,
    /// Relative L² against the supplied reference fields at their times.
    pub rel_l2: Vec<(f64, f64)>,
}

/// Adam phase then L-BFGS phase. On a non-finite loss the model is restored
/// to the last good parameters and an error is returned.
pub fn fpinn_train(
    model: &mut FpinnModel,
    problem: &Problem1D,
    schedule: &FpinnSchedule,
    reference: &[(f64, Vec<f64>)],
) -> Result<FpinnReport> {
    let ws = FpinnWorkspace::build(model, problem)?;
    let mut flat = model.store.flatten();
    let mut adam = AdamState::new(flat.len(), schedule.adam.clone());
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, flat.clone());

    let mut store = model.store.clone();
    let eval = |store: &mut ParamStore, flat: &[f64], grad: Option<&mut [f64]>| -> f64 {
        store.unflatten(flat).expect("flat size fixed");
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, store);
        let (total, _, _) = ws.loss(&tape, &binding, model, problem);
        if let Some(g) = grad {
            let grads = tape.backward(total).expect("scalar loss");
            g.copy_from_slice(&binding.flat_grads(&grads));
        }
        total.item()
    };

    let mut grad = vec![0.0; flat.len()];
    for it in 0..schedule.adam_iters {
        let loss = eval(&mut store, &flat, Some(&mut grad));
        if !loss.is_finite() {
            model.store.unflatten(&best.1)?;
            return Err(Error::Diverged { iter: it, what: "fPINN loss non-finite".into() });
        }
        if loss < best.0 {
            best = (loss, flat.clone());
        }
        if it % 50 == 0 {
            history.push((it, loss));
        }
        adam.step(&mut flat, &grad)?;
    }

    let report = lbfgs_minimize(|x, g| eval(&mut store, x, Some(g)), &mut flat, &schedule.lbfgs);
    let iterations = schedule.adam_iters + report.iterations;
    if report.final_value.is_finite() && report.final_value < best.0 {
        best = (report.final_value, flat.clone());
    }
    history.push((iterations, best.0));
    model.store.unflatten(&best.1)?;

    let rel_l2 = reference
        .iter()
        .map(|(t, field)| {
            let got = model.eval_grid(*t);
            (*t, crate::solvers::rel_l2_field(&got, field))
        })
        .collect();
    Ok(FpinnReport { loss_history: history, final_loss: best.0, iterations, rel_l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{benchmarks, exact};

    fn model_for(problem: &Problem1D, n: usize, n_t: usize, seed: u64) -> FpinnModel {
        let grid = Grid1D::new(problem.a, problem.b, n).unwrap();
        FpinnModel::new(grid, GlOrder::Second, 4, 20, n_t, seed, problem.t_end)
    }

    #[test]
    fn exact_solution_loss_floor_at_n512() {
        // residual of the exact manufactured solution: pure discretization,
        // must sit below 1e-6 at N = 512
        let problem = benchmarks::appendix_d(1.5);
        let grid = Grid1D::new(0.0, 1.0, 512).unwrap();
        let stencil = GlStencil::new(grid, 1.5, GlOrder::Second).unwrap();
        let prepared = problem.forcing.prepare(&grid);
        let mut gbuf = vec![0.0; grid.n_nodes()];
        let t_nodes: Vec<f64> = (0..8).map(|k| 0.125 * k as f64 + 0.05).collect();
        let mut acc = 0.0;
        let mut count = 0;
        for &t in &t_nodes {
            let u: Vec<f64> = grid.nodes().iter().map(|&x| exact::appd::solution(x, t)).collect();
            let du = stencil.apply(&u).unwrap();
            prepared.eval_into(t, &[], &mut gbuf);
            for (k, x) in grid.interior_nodes().iter().enumerate() {
                let ut = exact::appd::d_solution_dt(*x, t);
                let v = exact::appd::solution(*x, t);
                let r = ut - du[k] - v * (1.0 - v * v) - gbuf[k + 1];
                acc += r * r;
                count += 1;
            }
        }
        let mse = acc / count as f64;
        assert!(mse <= 1e-6, "discretization floor {mse}");
    }

    #[test]
    fn zero_surrogate_loss_is_mean_square_data() {
        let problem = benchmarks::appendix_d(1.4);
        let mut model = model_for(&problem, 48, 6, 3);
        let zeros = vec![0.0; model.store.flat_len()];
        model.store.unflatten(&zeros).unwrap();
        let parts = fpinn_loss(&model, &problem).unwrap();

        let prepared = problem.forcing.prepare(&model.grid);
        let mut gbuf = vec![0.0; model.grid.n_nodes()];
        let mut acc = 0.0;
        let mut n = 0;
        for &t in &model.t_nodes {
            prepared.eval_into(t, &[], &mut gbuf);
            for j in 1..model.grid.n {
                acc += gbuf[j] * gbuf[j];
                n += 1;
            }
        }
        let expect_res = acc / n as f64;
        assert!(
            (parts.residual - expect_res).abs() <= 1e-10 * expect_res,
            "{} vs {expect_res}",
            parts.residual
        );
        let expect_ic: f64 = model
            .grid
            .nodes()
            .iter()
            .map(|&x| problem.ic.eval(x, &[]).powi(2))
            .sum::<f64>()
            / model.grid.n_nodes() as f64;
        assert!((parts.ic - expect_ic).abs() <= 1e-10 * expect_ic);
    }

    #[test]
    fn loss_invariant_under_time_point_permutation() {
        let problem = benchmarks::appendix_d(1.5);
        let mut model = model_for(&problem, 32, 7, 5);
        let l1 = fpinn_loss(&model, &problem).unwrap().total;
        model.t_nodes.reverse();
        let l2 = fpinn_loss(&model, &problem).unwrap().total;
        assert!((l1 - l2).abs() <= 1e-9 * l1.abs(), "{l1} vs {l2}");
    }

    #[test]
    fn hard_lifting_zeroes_the_boundary_for_any_parameters() {
        let problem = benchmarks::appendix_d(1.5);
        let model = model_for(&problem, 32, 4, 11);
        for t in [0.0, 0.3, 0.9] {
            let f = model.eval_grid(t);
            assert_eq!(f[0], 0.0);
            assert_eq!(f[32], 0.0);
        }
    }

    #[test]
    fn equation_points_off_grid_rejected() {
        let problem = benchmarks::appendix_d(1.5);
        let model = model_for(&problem, 32, 4, 1);
        assert!(model.clone().with_equation_points(&[0.5]).is_ok());
        let model = model_for(&problem, 32, 4, 1);
        assert!(model.with_equation_points(&[0.51]).is_err());
    }

    #[test]
    fn loss_gradient_matches_finite_differences_through_stencil() {
        let problem = benchmarks::appendix_d(1.5);
        let grid = Grid1D::new(0.0, 1.0, 16).unwrap();
        let model = FpinnModel::new(grid, GlOrder::Second, 2, 6, 3, 9, problem.t_end);

        let ws = FpinnWorkspace::build(&model, &problem).unwrap();
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &model.store);
        let (total, _, _) = ws.loss(&tape, &binding, &model, &problem);
        let grads = tape.backward(total).unwrap();
        let flat_grad = binding.flat_grads(&grads);

        let flat = model.store.flatten();
        let mut loss_at = |v: &[f64]| -> f64 {
            let mut m = model.clone();
            m.store.unflatten(v).unwrap();
            fpinn_loss(&m, &problem).unwrap().total
        };
        let h = 1e-6;
        for k in (0..flat.len()).step_by(7) {
            let mut p = flat.clone();
            let mut q = flat.clone();
            p[k] += h;
            q[k] -= h;
            let fd = (loss_at(&p) - loss_at(&q)) / (2.0 * h);
            let scale = fd.abs().max(flat_grad[k].abs()).max(1e-3);
            assert!(
                (flat_grad[k] - fd).abs() / scale < 1e-5,
                "param {k}: {} vs {fd}",
                flat_grad[k]
            );
        }
    }

    #[test]
    fn frozen_training_leaves_loss_unchanged() {
        let problem = benchmarks::appendix_d(1.5);
        let mut model = model_for(&problem, 24, 4, 13);
        let before = fpinn_loss(&model, &problem).unwrap().total;
        let schedule = FpinnSchedule {
            adam_iters: 25,
            adam: AdamConfig { lr: 0.0, decay_every: 0, ..AdamConfig::default() },
            lbfgs: LbfgsConfig { max_iters: 0, ..LbfgsConfig::default() },
        };
        let rep = fpinn_train(&mut model, &problem, &schedule, &[]).unwrap();
        let after = fpinn_loss(&model, &problem).unwrap().total;
        assert!((before - after).abs() <= 1e-12 * before);
        assert_eq!(rep.final_loss, after);
    }
}
