//! The composite training loss.
//!
//! With residual `R(x,t;ξ) = ∂u/∂t - μ D^α u - ε K(ξ) f(u) - g` assembled on
//! the (interior grid × t × ξ) lattice:
//!
//! - `MSE_w`: squared means of ε₁ = E[R] over (x,t), ε₂ = ⟨R, U_i⟩ over
//!   (t,ξ,i), ε₃ = E[R·Y_i] over (x,t,i);
//! - `MSE_IC`: four mean-square mismatches of ū, U_i, A_i, Y_i at t₀;
//! - `MSE_BC`: boundary traces of ū and A_i·U_i (identically zero under hard
//!   lifting);
//! - `MSE_BO`: (E[Y_i])², the symmetrized ⟨dU_i/dt, U_j⟩ penalties, and the
//!   symmetrized E[Y_i dY_j/dt] penalties;
//! - `MSE_g`: the pointwise strong residual.
//!
//! Expectations use the stochastic set's weights; plain averages over the
//! sample index follow the displayed normalizations. Spatial inner products
//! are composite-trapezoid sums (boundary rows carry zero data).

use std::rc::Rc;

use crate::autodiff::{LinMap, Tape, Var};
use crate::error::{Error, Result};
use crate::fracops::{GlOrder, GlStencil};
use crate::nn::ParamBinding;
use crate::problems::{Nonlinearity, Problem1D, ReactionCoeff};
use crate::tensor::Tensor;

use super::sets::TrainingSets;
use super::{bind_exact, bind_networks, BoSurrogate, BoundComponents, ExactComponents};

#[derive(Clone, Copy, Debug)]
pub struct LossWeights {
    pub w: f64,
    pub ic: f64,
    pub bc: f64,
    pub bo: f64,
    pub g: f64,
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w", self.w),
            ("ic", self.ic),
            ("bc", self.bc),
            ("bo", self.bo),
            ("g", self.g),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidArg(format!("loss weight λ_{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Dynamic rebalancing: every `interval` steps,
/// `λ_k ← (1-ρ) λ_k + ρ ‖∇MSE_w‖/‖∇MSE_k‖`, clamped; λ_w stays anchored.
#[derive(Clone, Copy, Debug)]
pub struct DynamicWeights {
    pub interval: usize,
    pub rho: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for DynamicWeights {
    fn default() -> Self {
        Self { interval: 100, rho: 0.1, min: 1e-2, max: 1e6 }
    }
}

/// One relaxation step of the dynamic weights. Gradient norms are of the
/// anchor term and then (ic, bc, bo, g); a zero norm leaves that weight
/// untouched.
pub fn update_dynamic_weights(
    weights: &mut LossWeights,
    cfg: &DynamicWeights,
    norm_w: f64,
    norms: [f64; 4],
) {
    let upd = |lam: &mut f64, norm_k: f64| {
        if norm_k > 0.0 && norm_w > 0.0 {
            let target = norm_w / norm_k;
            *lam = ((1.0 - cfg.rho) * *lam + cfg.rho * target).clamp(cfg.min, cfg.max);
        }
    };
    upd(&mut weights.ic, norms[0]);
    upd(&mut weights.bc, norms[1]);
    upd(&mut weights.bo, norms[2]);
    upd(&mut weights.g, norms[3]);
}

/// Initial-condition targets, resolved to tensors.
#[derive(Clone, Debug)]
pub enum IcTargets {
    /// Explicit targets: ū₀ (nodes), u_i⁰ (nodes) per mode, a_i⁰, Y_i⁰ (n_ξ).
    Fields { ubar0: Vec<f64>, u0: Vec<Vec<f64>>, a0: Vec<f64>, y0: Vec<Vec<f64>> },
    /// As `Fields`, but the ū part is a plain MSE against sensor readings at
    /// arbitrary locations instead of the grid trace.
    Sensors {
        xs: Vec<f64>,
        values: Vec<f64>,
        u0: Vec<Vec<f64>>,
        a0: Vec<f64>,
        y0: Vec<Vec<f64>>,
    },
}

impl IcTargets {
    /// Deterministic-start targets: ū₀ from the problem's initial condition,
    /// orthonormal sine modes, zero scale factors, first-order unit-variance
    /// polynomial chaos in the individual ξ coordinates.
    pub fn deterministic(problem: &Problem1D, sets: &TrainingSets, n_modes: usize) -> Result<Self> {
        let d = sets.xi.dim;
        if n_modes > d {
            return Err(Error::InvalidArg(format!(
                "{n_modes} modes need at least as many random coordinates, have {d}"
            )));
        }
        let nodes = sets.grid.nodes();
        let len = problem.b - problem.a;
        let ubar0 = nodes.iter().map(|&x| problem.ic.eval(x, &[])).collect();
        let u0 = (0..n_modes)
            .map(|i| {
                nodes
                    .iter()
                    .map(|&x| {
                        (2.0 / len).sqrt()
                            * ((i + 1) as f64 * std::f64::consts::PI * (x - problem.a) / len).sin()
                    })
                    .collect()
            })
            .collect();
        let y0 = (0..n_modes)
            .map(|i| {
                (0..sets.xi.len())
                    .map(|l| problem.law.gpc_unit_variance(sets.xi.points.get(l, i)))
                    .collect()
            })
            .collect();
        Ok(IcTargets::Fields { ubar0, u0, a0: vec![0.0; n_modes], y0 })
    }

    /// Targets read off closed-form components at `t0`.
    pub fn from_exact(exact: &ExactComponents, sets: &TrainingSets) -> Self {
        let nodes = sets.grid.nodes();
        IcTargets::Fields {
            ubar0: nodes.iter().map(|&x| (exact.mean)(x, sets.t0)).collect(),
            u0: (0..exact.n_modes)
                .map(|i| nodes.iter().map(|&x| (exact.mode)(i, x, sets.t0)).collect())
                .collect(),
            a0: (0..exact.n_modes).map(|i| (exact.scale)(i, sets.t0)).collect(),
            y0: (0..exact.n_modes)
                .map(|i| {
                    (0..sets.xi.len())
                        .map(|l| (exact.coeff)(i, sets.t0, sets.xi.point(l)))
                        .collect()
                })
                .collect(),
        }
    }

    /// Targets read off a trained surrogate at `t0` (window hand-off).
    pub fn from_surrogate(prev: &BoSurrogate, domain: (f64, f64), sets: &TrainingSets) -> Self {
        let nodes = sets.grid.nodes();
        IcTargets::Fields {
            ubar0: prev.eval_mean(domain, &nodes.iter().map(|&x| (x, sets.t0)).collect::<Vec<_>>()),
            u0: (0..prev.n_modes)
                .map(|i| prev.eval_mode(i, domain, &nodes, sets.t0))
                .collect(),
            a0: (0..prev.n_modes).map(|i| prev.eval_scale(i, &[sets.t0])[0]).collect(),
            y0: (0..prev.n_modes)
                .map(|i| prev.eval_coeff(i, sets.t0, &sets.xi.points))
                .collect(),
        }
    }

    /// Replace the ū part with noisy sensor readings.
    pub fn with_sensors(self, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidArg(format!(
                "sensor initial data needs at least 2 locations, got {}",
                xs.len()
            )));
        }
        match self {
            IcTargets::Fields { u0, a0, y0, .. } | IcTargets::Sensors { u0, a0, y0, .. } => {
                Ok(IcTargets::Sensors { xs, values, u0, a0, y0 })
            }
        }
    }

    pub fn sensor_xs(&self) -> Option<&[f64]> {
        match self {
            IcTargets::Sensors { xs, .. } => Some(xs),
            _ => None,
        }
    }
}

/// Scalar PDE coefficients, fixed or trainable on the tape. In the
/// trainable case the stencil map must have been built at `alpha`'s current
/// value with its dM/dα attached, so the fractional order's gradient flows
/// through the operator.
pub enum PdeCoeffs<'t> {
    Fixed,
    Trainable { mu: Var<'t>, eps: Var<'t>, alpha: Var<'t>, stencil: Rc<LinMap> },
}

/// Constant tensors shared by every loss evaluation of one run.
pub struct LossWorkspace {
    pub n_modes: usize,
    n_nodes: usize,
    n_int: usize,
    n_t: usize,
    n_xi: usize,
    dx: f64,
    mu: f64,
    epsilon: f64,
    nonlinearity: Nonlinearity,
    g_lattice: Tensor,
    /// reaction coefficient per lattice entry when it is random
    k_lattice: Option<Tensor>,
    /// unscaled stencil map (μ applied at assembly time)
    stencil_fixed: Rc<LinMap>,
    /// ξ-expectation weights as a (1, n_t·n_ξ) row
    w_row: Tensor,
    /// ξ-expectation weights as an (n_t, n_ξ) tile
    w_tile_y: Tensor,
    /// full-grid trapezoid weights tiled to (nodes, n_t)
    trap_tile: Tensor,
    ic: IcTargets,
    obs: Option<(Vec<(f64, f64)>, Vec<f64>)>,
    grid_order: (crate::fracops::Grid1D, GlOrder),
}

impl LossWorkspace {
    pub fn build(
        problem: &Problem1D,
        sets: &TrainingSets,
        order: GlOrder,
        n_modes: usize,
        ic: IcTargets,
    ) -> Result<Self> {
        let grid = sets.grid;
        let n_nodes = grid.n_nodes();
        let n_int = grid.n_interior();
        let n_t = sets.n_t();
        let n_xi = sets.n_xi();

        let prepared = problem.forcing.prepare(&grid);
        let mut gbuf = vec![0.0; n_nodes];
        let mut g_lattice = Tensor::zeros(n_int, n_t * n_xi);
        for (s, &t) in sets.t_nodes.iter().enumerate() {
            for l in 0..n_xi {
                prepared.eval_into(t, sets.xi.point(l), &mut gbuf);
                for k in 0..n_int {
                    g_lattice.set(k, s * n_xi + l, gbuf[k + 1]);
                }
            }
        }
        let k_lattice = match problem.reaction {
            ReactionCoeff::One => None,
            ReactionCoeff::RandomScale { .. } => {
                let mut k = Tensor::zeros(n_int, n_t * n_xi);
                for s in 0..n_t {
                    for l in 0..n_xi {
                        let v = problem.reaction.eval(sets.xi.point(l));
                        for r in 0..n_int {
                            k.set(r, s * n_xi + l, v);
                        }
                    }
                }
                Some(k)
            }
        };

        let stencil = GlStencil::new(grid, problem.alpha, order)?;
        let stencil_fixed = Rc::new(LinMap { m: stencil.matrix().clone(), dm_dp: None });

        let w_row = Tensor::from_fn(1, n_t * n_xi, |_, c| sets.xi.weights[c % n_xi]);
        let w_tile_y = Tensor::from_fn(n_t, n_xi, |_, l| sets.xi.weights[l]);
        let trapw = grid.trapezoid_weights();
        let trap_tile = Tensor::from_fn(n_nodes, n_t, |j, _| trapw[j]);

        Ok(Self {
            n_modes,
            n_nodes,
            n_int,
            n_t,
            n_xi,
            dx: grid.dx(),
            mu: problem.mu,
            epsilon: problem.epsilon,
            nonlinearity: problem.nonlinearity,
            g_lattice,
            k_lattice,
            stencil_fixed,
            w_row,
            w_tile_y,
            trap_tile,
            ic,
            obs: None,
            grid_order: (grid, order),
        })
    }

    /// Attach mean-value observations for inverse training.
    pub fn with_observations(mut self, points: Vec<(f64, f64)>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArg("empty observation set".into()));
        }
        self.obs = Some((points, values));
        Ok(self)
    }

    pub fn observation_points(&self) -> Option<Vec<(f64, f64)>> {
        self.obs.as_ref().map(|(p, _)| p.clone())
    }

    /// Stencil map at a trainable fractional order (with dM/dα).
    pub fn stencil_at(&self, alpha: f64) -> Result<Rc<LinMap>> {
        let (grid, order) = self.grid_order;
        let stencil = GlStencil::new(grid, alpha, order)?;
        let dm = stencil.alpha_derivative_matrix()?;
        Ok(Rc::new(LinMap { m: stencil.matrix().clone(), dm_dp: Some(dm) }))
    }

    fn lattice_of_xt<'t>(&self, v: Var<'t>) -> Var<'t> {
        v.slice_rows(1, self.n_int).repeat_cols(self.n_xi)
    }

    fn lattice_of_y<'t>(&self, v: Var<'t>) -> Var<'t> {
        v.reshape(1, self.n_t * self.n_xi).broadcast_rows(self.n_int)
    }

    /// Assemble every loss term on the tape.
    pub fn terms<'t>(
        &self,
        tape: &'t Tape,
        b: &BoundComponents<'t>,
        coeffs: &PdeCoeffs<'t>,
    ) -> LossTerms<'t> {
        let n = self.n_modes;
        assert_eq!(b.n_modes, n, "mode count mismatch between components and workspace");
        let zero = || tape.constant_scalar(0.0);

        // scaled modes a_i U_i on (nodes, n_t) and their time derivatives
        let mut au = Vec::with_capacity(n);
        let mut dau = Vec::with_capacity(n);
        for i in 0..n {
            let arow = b.a[i].broadcast_rows(self.n_nodes);
            let darow = b.da[i].broadcast_rows(self.n_nodes);
            au.push(b.u[i].mul(arow));
            dau.push(b.du[i].mul(arow).add(b.u[i].mul(darow)));
        }

        // stencil applications on (nodes, n_t) fields
        let (stencil, alpha_var) = match coeffs {
            PdeCoeffs::Fixed => (self.stencil_fixed.clone(), None),
            PdeCoeffs::Trainable { stencil, alpha, .. } => (stencil.clone(), Some(*alpha)),
        };
        let lubar = b.ubar.apply_linear(stencil.clone(), alpha_var);
        let lau: Vec<Var> =
            au.iter().map(|f| f.apply_linear(stencil.clone(), alpha_var)).collect();

        // lattice assembly
        let mut u_lat = self.lattice_of_xt(b.ubar);
        let mut ut_lat = self.lattice_of_xt(b.dubar);
        let mut lu_lat = lubar.slice_rows(0, self.n_int).repeat_cols(self.n_xi);
        for i in 0..n {
            let ybc = self.lattice_of_y(b.y[i]);
            let dybc = self.lattice_of_y(b.dy[i]);
            u_lat = u_lat.add(self.lattice_of_xt(au[i]).mul(ybc));
            ut_lat = ut_lat
                .add(self.lattice_of_xt(dau[i]).mul(ybc))
                .add(self.lattice_of_xt(au[i]).mul(dybc));
            lu_lat = lu_lat.add(lau[i].slice_rows(0, self.n_int).repeat_cols(self.n_xi).mul(ybc));
        }

        let mu_term = match coeffs {
            PdeCoeffs::Fixed => lu_lat.scale(self.mu),
            PdeCoeffs::Trainable { mu, .. } => lu_lat.mul_scalar(*mu),
        };
        let mut r = ut_lat.sub(mu_term);
        if let Nonlinearity::CubicReaction = self.nonlinearity {
            let mut fu = u_lat.sub(u_lat.square().mul(u_lat));
            if let Some(k) = &self.k_lattice {
                fu = fu.mul(tape.constant(k.clone()));
            }
            let eps_term = match coeffs {
                PdeCoeffs::Fixed => fu.scale(self.epsilon),
                PdeCoeffs::Trainable { eps, .. } => fu.mul_scalar(*eps),
            };
            r = r.sub(eps_term);
        }
        r = r.sub(tape.constant(self.g_lattice.clone()));

        // weak terms
        let w_bcast = tape.constant(self.w_row.clone()).broadcast_rows(self.n_int);
        let rw = r.mul(w_bcast);
        let eps1 = rw.block_sum_cols(self.n_xi);
        let mut mse_w = eps1.square().mean();
        if n > 0 {
            let mut eps2_acc = zero();
            let mut eps3_acc = zero();
            for i in 0..n {
                let u_int = b.u[i].slice_rows(1, self.n_int).repeat_cols(self.n_xi);
                let eps2 = r.mul(u_int).sum_rows().scale(self.dx);
                eps2_acc = eps2_acc.add(eps2.square().mean());
                let ywrow = b.y[i].mul(tape.constant(self.w_tile_y.clone()));
                let eps3 = r.mul(self.lattice_of_y(ywrow)).block_sum_cols(self.n_xi);
                eps3_acc = eps3_acc.add(eps3.square().mean());
            }
            mse_w = mse_w.add(eps2_acc.scale(1.0 / n as f64)).add(eps3_acc.scale(1.0 / n as f64));
        }

        let mse_g = r.square().mean();

        // initial-condition term
        let (ubar_part, u0_t, a0_t, y0_t) = match &self.ic {
            IcTargets::Fields { ubar0, u0, a0, y0 } => {
                let target = tape.constant(Tensor::col_from(ubar0));
                (b.ubar_ic.sub(target).square().mean(), u0, a0, y0)
            }
            IcTargets::Sensors { values, u0, a0, y0, .. } => {
                let pred = b
                    .ubar_sensors
                    .expect("sensor targets need sensor evaluations bound");
                let target = tape.constant(Tensor::col_from(values));
                (pred.sub(target).square().mean(), u0, a0, y0)
            }
        };
        let mut mse_ic = ubar_part;
        if n > 0 {
            let mut u_acc = zero();
            let mut a_acc = zero();
            let mut y_acc = zero();
            for i in 0..n {
                u_acc = u_acc.add(
                    b.u_ic[i].sub(tape.constant(Tensor::col_from(&u0_t[i]))).square().mean(),
                );
                a_acc = a_acc.add(b.a_ic[i].add_const(-a0_t[i]).square());
                y_acc = y_acc.add(
                    b.y_ic[i].sub(tape.constant(Tensor::col_from(&y0_t[i]))).square().mean(),
                );
            }
            let inv_n = 1.0 / n as f64;
            mse_ic = mse_ic
                .add(u_acc.scale(inv_n))
                .add(a_acc.scale(inv_n))
                .add(y_acc.scale(inv_n));
        }

        // boundary term
        let mse_bc = match (&b.ubar_bc, &b.u_bc) {
            (Some(ub), Some(ubs)) => {
                let mut acc = ub.square().mean();
                if n > 0 {
                    let mut modes = zero();
                    for i in 0..n {
                        let aui = ubs[i].mul(b.a[i].broadcast_rows(2));
                        modes = modes.add(aui.square().mean());
                    }
                    acc = acc.add(modes.scale(1.0 / n as f64));
                }
                acc
            }
            _ => zero(),
        };

        // bi-orthogonality term
        let mse_bo = if n == 0 {
            zero()
        } else {
            let wy = tape.constant(self.w_tile_y.clone());
            let trap = tape.constant(self.trap_tile.clone());
            let mut t1 = zero();
            for i in 0..n {
                let ey = b.y[i].mul(wy).block_sum_cols(self.n_xi); // (n_t, 1)
                t1 = t1.add(ey.square().mean());
            }
            let mut t2 = zero();
            let mut t3 = zero();
            for i in 0..n {
                for j in 0..n {
                    let dui_uj = b.du[i].mul(b.u[j]).mul(trap).sum_rows();
                    let duj_ui = b.du[j].mul(b.u[i]).mul(trap).sum_rows();
                    let sym = dui_uj.add(duj_ui);
                    t2 = t2.add(sym.square().mean());

                    let yi_dyj = b.y[i].mul(b.dy[j]).mul(wy).block_sum_cols(self.n_xi);
                    let yj_dyi = b.y[j].mul(b.dy[i]).mul(wy).block_sum_cols(self.n_xi);
                    let symy = yi_dyj.add(yj_dyi);
                    t3 = t3.add(symy.square().mean());
                }
            }
            // displayed normalizations: 1/(N n_t), 1/(N² n_t), 1/(N n_t);
            // the means above already divide by n_t
            t1.scale(1.0 / n as f64)
                .add(t2.scale(1.0 / (n * n) as f64))
                .add(t3.scale(1.0 / n as f64))
        };

        // observation term for inverse problems
        let data = self.obs.as_ref().map(|(_, values)| {
            let pred = b.ubar_obs.expect("observation targets need bound evaluations");
            let target = tape.constant(Tensor::col_from(values));
            pred.sub(target).square().mean()
        });

        LossTerms { w: mse_w, ic: mse_ic, bc: mse_bc, bo: mse_bo, g: mse_g, data }
    }
}

pub struct LossTerms<'t> {
    pub w: Var<'t>,
    pub ic: Var<'t>,
    pub bc: Var<'t>,
    pub bo: Var<'t>,
    pub g: Var<'t>,
    pub data: Option<Var<'t>>,
}

impl<'t> LossTerms<'t> {
    /// `λ_w MSE_w + λ_IC MSE_IC + λ_BC MSE_BC + λ_BO MSE_BO + λ_g MSE_g`
    /// (+ `λ_data` times the observation term when present).
    pub fn weighted(&self, w: &LossWeights, lambda_data: f64) -> Var<'t> {
        let mut total = self
            .w
            .scale(w.w)
            .add(self.ic.scale(w.ic))
            .add(self.bc.scale(w.bc))
            .add(self.bo.scale(w.bo))
            .add(self.g.scale(w.g));
        if let Some(d) = &self.data {
            total = total.add(d.scale(lambda_data));
        }
        total
    }

    pub fn values(&self) -> LossParts {
        LossParts {
            w: self.w.item(),
            ic: self.ic.item(),
            bc: self.bc.item(),
            bo: self.bo.item(),
            g: self.g.item(),
            data: self.data.as_ref().map(|d| d.item()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LossParts {
    pub w: f64,
    pub ic: f64,
    pub bc: f64,
    pub bo: f64,
    pub g: f64,
    pub data: Option<f64>,
}

impl LossParts {
    pub fn weighted(&self, w: &LossWeights, lambda_data: f64) -> f64 {
        w.w * self.w
            + w.ic * self.ic
            + w.bc * self.bc
            + w.bo * self.bo
            + w.g * self.g
            + self.data.map(|d| lambda_data * d).unwrap_or(0.0)
    }
}

/// Sources the loss can be evaluated at.
pub enum ComponentSource<'a> {
    Networks(&'a BoSurrogate),
    Exact(&'a ExactComponents),
}

/// One-shot evaluation of every loss part at the given source.
pub fn evaluate_parts(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<LossParts> {
    let n_modes = match src {
        ComponentSource::Networks(s) => s.n_modes,
        ComponentSource::Exact(e) => e.n_modes,
    };
    let ws = LossWorkspace::build(problem, sets, order, n_modes, ic)?;
    let tape = Tape::new();
    let terms = match src {
        ComponentSource::Networks(s) => {
            let binding = ParamBinding::bind(&tape, &s.store);
            let sensor_xs = ws.ic.sensor_xs().map(|v| v.to_vec());
            let bound =
                bind_networks(&tape, &binding, s, sets, sensor_xs.as_deref(), None);
            ws.terms(&tape, &bound, &PdeCoeffs::Fixed)
        }
        ComponentSource::Exact(e) => {
            let bound = bind_exact(&tape, e, sets)?;
            ws.terms(&tape, &bound, &PdeCoeffs::Fixed)
        }
    };
    Ok(terms.values())
}

pub fn loss_weak(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<f64> {
    Ok(evaluate_parts(src, problem, sets, order, ic)?.w)
}

pub fn loss_ic(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<f64> {
    Ok(evaluate_parts(src, problem, sets, order, ic)?.ic)
}

pub fn loss_bc(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<f64> {
    Ok(evaluate_parts(src, problem, sets, order, ic)?.bc)
}

pub fn loss_bo(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<f64> {
    Ok(evaluate_parts(src, problem, sets, order, ic)?.bo)
}

pub fn loss_strong(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
) -> Result<f64> {
    Ok(evaluate_parts(src, problem, sets, order, ic)?.g)
}

/// Weighted total at the given source.
pub fn total_loss(
    src: &ComponentSource<'_>,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    ic: IcTargets,
    weights: &LossWeights,
) -> Result<f64> {
    weights.validate()?;
    Ok(evaluate_parts(src, problem, sets, order, ic)?.weighted(weights, 0.0))
}
