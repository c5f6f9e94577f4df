//! The four-network bi-orthogonal surrogate
//! `u(x,t;ξ) = ū_nn(x,t) + Σ_i A_nn,i(t) U_nn,i(x,t) Y_nn,i(t;ξ)` and its
//! weak-form training machinery.
//!
//! `A_nn` is a set of N independent single-output networks (the scale
//! factors can live on very different scales); `U_nn` and `Y_nn` carry all N
//! modes as output columns. With hard lifting on, `ū_nn` and every `U_nn,i`
//! are multiplied by the boundary bubble `(x-a)(b-x)`, so Dirichlet data
//! holds exactly.
//!
//! Losses consume "bound components" — value and time-derivative tensors on
//! a tape — which are produced either by the networks or by closed-form
//! evaluators. The exact-component route drives the master no-training
//! correctness check and the initial-condition targets of window training.

mod loss;
mod sets;
mod train;

pub use loss::{
    evaluate_parts, loss_bc, loss_bo, loss_ic, loss_strong, loss_weak, total_loss,
    update_dynamic_weights, ComponentSource, DynamicWeights, IcTargets, LossParts, LossTerms,
    LossWeights, LossWorkspace, PdeCoeffs,
};
pub use sets::{TrainingSets, XiStrategy};
pub use train::{
    predict_stats, train, train_inverse, train_windowed, transfer_finetune, InverseParams,
    InverseResult, Schedule, TrainHistory, TrainedWindows, TransferReport,
};

use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::nn::{MlpSpec, ParamBinding, ParamStore, TapeMlp};
use crate::tensor::Tensor;

/// Network sizes for one surrogate, `(hidden depth, hidden width)` each.
#[derive(Clone, Copy, Debug)]
pub struct SurrogateConfig {
    pub n_modes: usize,
    pub ubar: (usize, usize),
    pub a: (usize, usize),
    pub u: (usize, usize),
    pub y: (usize, usize),
    pub lift: bool,
}

impl SurrogateConfig {
    /// Sizes used by the crossing benchmark (ū/A/U 4×64, Y 4×32).
    pub fn manufactured(n_modes: usize) -> Self {
        Self { n_modes, ubar: (4, 64), a: (4, 64), u: (4, 64), y: (4, 32), lift: false }
    }

    /// Sizes used by the static-forcing forward problem.
    pub fn forward_static(n_modes: usize) -> Self {
        Self { n_modes, ubar: (3, 32), a: (3, 4), u: (3, 64), y: (3, 64), lift: false }
    }

    /// Sizes used by the time-evolving forcing problem (hard lifting).
    pub fn forward_evolving(n_modes: usize) -> Self {
        Self { n_modes, ubar: (3, 32), a: (3, 4), u: (3, 64), y: (3, 32), lift: true }
    }
}

/// The four neural surrogates plus optional hard-BC lifting.
#[derive(Clone, Debug)]
pub struct BoSurrogate {
    pub n_modes: usize,
    pub xi_dim: usize,
    pub lift: bool,
    pub ubar_spec: MlpSpec,
    pub a_specs: Vec<MlpSpec>,
    pub u_spec: MlpSpec,
    pub y_spec: MlpSpec,
    pub store: ParamStore,
}

impl BoSurrogate {
    pub fn new(cfg: &SurrogateConfig, xi_dim: usize, seed: u64) -> Self {
        let ubar_spec = MlpSpec::hidden(2, cfg.ubar.0, cfg.ubar.1, 1);
        let a_specs: Vec<MlpSpec> =
            (0..cfg.n_modes).map(|_| MlpSpec::hidden(1, cfg.a.0, cfg.a.1, 1)).collect();
        let u_spec = MlpSpec::hidden(2, cfg.u.0, cfg.u.1, cfg.n_modes);
        let y_spec = MlpSpec::hidden(1 + xi_dim, cfg.y.0, cfg.y.1, cfg.n_modes);
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ubar_spec.init_into(&mut store, "ubar", &mut rng);
        for (i, sp) in a_specs.iter().enumerate() {
            sp.init_into(&mut store, &format!("a{i}"), &mut rng);
        }
        u_spec.init_into(&mut store, "u", &mut rng);
        y_spec.init_into(&mut store, "y", &mut rng);
        Self {
            n_modes: cfg.n_modes,
            xi_dim,
            lift: cfg.lift,
            ubar_spec,
            a_specs,
            u_spec,
            y_spec,
            store,
        }
    }

    pub fn architecture_signature(&self) -> String {
        format!(
            "ubar{:?} a{:?}x{} u{:?} y{:?} N={} lift={}",
            self.ubar_spec.widths,
            self.a_specs.first().map(|s| s.widths.clone()).unwrap_or_default(),
            self.a_specs.len(),
            self.u_spec.widths,
            self.y_spec.widths,
            self.n_modes,
            self.lift
        )
    }

    fn bubble(&self, a: f64, b: f64, x: f64) -> f64 {
        if self.lift {
            (x - a) * (b - x)
        } else {
            1.0
        }
    }

    /// Plain (no-tape) evaluation of the assembled surrogate at one (t, ξ)
    /// over a set of x nodes.
    pub fn eval_field(&self, domain: (f64, f64), xs: &[f64], t: f64, xi: &[f64]) -> Vec<f64> {
        let xt = Tensor::from_fn(xs.len(), 2, |i, c| if c == 0 { xs[i] } else { t });
        let ubar = self.ubar_spec.eval(&self.store, "ubar", &xt);
        let umodes = self.u_spec.eval(&self.store, "u", &xt);
        let tin = Tensor::from_raw(1, 1, vec![t]);
        let a_vals: Vec<f64> = (0..self.n_modes)
            .map(|i| self.a_specs[i].eval(&self.store, &format!("a{i}"), &tin).item())
            .collect();
        let mut ty = vec![t];
        ty.extend_from_slice(xi);
        let y_vals = self.y_spec.eval(&self.store, "y", &Tensor::from_raw(1, 1 + xi.len(), ty));
        xs.iter()
            .enumerate()
            .map(|(k, &x)| {
                let bub = self.bubble(domain.0, domain.1, x);
                let mut v = bub * ubar.get(k, 0);
                for i in 0..self.n_modes {
                    v += a_vals[i] * bub * umodes.get(k, i) * y_vals.get(0, i);
                }
                v
            })
            .collect()
    }

    /// Mean-field surrogate at arbitrary (x, t) points.
    pub fn eval_mean(&self, domain: (f64, f64), points: &[(f64, f64)]) -> Vec<f64> {
        let xt = Tensor::from_fn(points.len(), 2, |i, c| if c == 0 { points[i].0 } else { points[i].1 });
        let ubar = self.ubar_spec.eval(&self.store, "ubar", &xt);
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, _))| self.bubble(domain.0, domain.1, x) * ubar.get(i, 0))
            .collect()
    }

    /// Scale factor `a_i(t)`.
    pub fn eval_scale(&self, i: usize, ts: &[f64]) -> Vec<f64> {
        let tin = Tensor::from_fn(ts.len(), 1, |r, _| ts[r]);
        let out = self.a_specs[i].eval(&self.store, &format!("a{i}"), &tin);
        (0..ts.len()).map(|r| out.get(r, 0)).collect()
    }

    /// Spatial mode `U_i(x, t)` (lifted).
    pub fn eval_mode(&self, i: usize, domain: (f64, f64), xs: &[f64], t: f64) -> Vec<f64> {
        let xt = Tensor::from_fn(xs.len(), 2, |r, c| if c == 0 { xs[r] } else { t });
        let out = self.u_spec.eval(&self.store, "u", &xt);
        xs.iter()
            .enumerate()
            .map(|(r, &x)| self.bubble(domain.0, domain.1, x) * out.get(r, i))
            .collect()
    }

    /// Stochastic coefficient `Y_i(t, ξ)` over a sample set.
    pub fn eval_coeff(&self, i: usize, t: f64, xi: &Tensor) -> Vec<f64> {
        let n = xi.rows();
        let input = Tensor::from_fn(n, 1 + xi.cols(), |r, c| {
            if c == 0 {
                t
            } else {
                xi.get(r, c - 1)
            }
        });
        let out = self.y_spec.eval(&self.store, "y", &input);
        (0..n).map(|r| out.get(r, i)).collect()
    }
}

/// Closed-form component evaluators (values and time derivatives) used in
/// place of the networks for oracle checks and as window initial targets.
#[derive(Clone)]
pub struct ExactComponents {
    pub n_modes: usize,
    pub mean: Rc<dyn Fn(f64, f64) -> f64>,
    pub d_mean: Rc<dyn Fn(f64, f64) -> f64>,
    pub mode: Rc<dyn Fn(usize, f64, f64) -> f64>,
    pub d_mode: Rc<dyn Fn(usize, f64, f64) -> f64>,
    pub scale: Rc<dyn Fn(usize, f64) -> f64>,
    pub d_scale: Rc<dyn Fn(usize, f64) -> f64>,
    pub coeff: Rc<dyn Fn(usize, f64, &[f64]) -> f64>,
    pub d_coeff: Rc<dyn Fn(usize, f64, &[f64]) -> f64>,
}

impl std::fmt::Debug for ExactComponents {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ExactComponents(n_modes={})", self.n_modes)
    }
}

impl ExactComponents {
    /// The crossing benchmark's closed forms.
    pub fn manufactured_cross() -> Self {
        use crate::problems::exact::cross;
        Self {
            n_modes: 2,
            mean: Rc::new(cross::mean),
            d_mean: Rc::new(cross::d_mean_dt),
            mode: Rc::new(|i, x, _t| cross::mode(i, x)),
            d_mode: Rc::new(|_i, _x, _t| 0.0),
            scale: Rc::new(cross::a),
            d_scale: Rc::new(cross::da_dt),
            coeff: Rc::new(|i, _t, xi| cross::y(i, xi)),
            d_coeff: Rc::new(|_i, _t, _xi| 0.0),
        }
    }
}

/// Value/time-derivative tensors of all components on one tape.
pub struct BoundComponents<'t> {
    pub n_modes: usize,
    /// (nodes, n_t)
    pub ubar: Var<'t>,
    pub dubar: Var<'t>,
    /// per mode, (nodes, n_t)
    pub u: Vec<Var<'t>>,
    pub du: Vec<Var<'t>>,
    /// per mode, (1, n_t)
    pub a: Vec<Var<'t>>,
    pub da: Vec<Var<'t>>,
    /// per mode, (n_t, n_ξ)
    pub y: Vec<Var<'t>>,
    pub dy: Vec<Var<'t>>,
    /// (nodes, 1)
    pub ubar_ic: Var<'t>,
    pub u_ic: Vec<Var<'t>>,
    /// (1, 1)
    pub a_ic: Vec<Var<'t>>,
    /// (n_ξ, 1)
    pub y_ic: Vec<Var<'t>>,
    /// (2, n_t); `None` under hard lifting (identically zero)
    pub ubar_bc: Option<Var<'t>>,
    pub u_bc: Option<Vec<Var<'t>>>,
    /// ū_nn at sensor locations, (n_s, 1), when a sensor IC is configured
    pub ubar_sensors: Option<Var<'t>>,
    /// ū_nn at observation points, (n_obs, 1), for inverse training
    pub ubar_obs: Option<Var<'t>>,
}

/// Bind the networks on a tape over the training sets.
pub fn bind_networks<'t>(
    tape: &'t Tape,
    binding: &ParamBinding<'t>,
    surr: &BoSurrogate,
    sets: &TrainingSets,
    sensor_xs: Option<&[f64]>,
    obs_points: Option<&[(f64, f64)]>,
) -> BoundComponents<'t> {
    let n = surr.n_modes;
    let nodes = sets.grid.nodes();
    let n_nodes = nodes.len();
    let n_t = sets.t_nodes.len();
    let n_xi = sets.xi.len();
    let d = sets.xi.dim;
    let (ga, gb) = (sets.grid.a, sets.grid.b);

    let ubar_net = TapeMlp::bind(binding, "ubar", &surr.ubar_spec);
    let u_net = TapeMlp::bind(binding, "u", &surr.u_spec);
    let y_net = TapeMlp::bind(binding, "y", &surr.y_spec);
    let a_nets: Vec<TapeMlp> = (0..n)
        .map(|i| TapeMlp::bind(binding, &format!("a{i}"), &surr.a_specs[i]))
        .collect();

    // (x, t) lattice, x-major rows
    let xt = tape.constant(Tensor::from_fn(n_nodes * n_t, 2, |r, c| {
        let (j, s) = (r / n_t, r % n_t);
        if c == 0 {
            nodes[j]
        } else {
            sets.t_nodes[s]
        }
    }));
    let xt_tan = tape.constant(Tensor::from_fn(n_nodes * n_t, 2, |_, c| {
        if c == 1 {
            1.0
        } else {
            0.0
        }
    }));
    let (ubar_raw, dubar_raw) = ubar_net.forward_with_tangent(xt, xt_tan);
    let (umat_raw, dumat_raw) = u_net.forward_with_tangent(xt, xt_tan);

    let bubble_tile = tape.constant(Tensor::from_fn(n_nodes, n_t, |j, _| {
        surr.bubble(ga, gb, nodes[j])
    }));
    let lift_mat = |v: Var<'t>| -> Var<'t> {
        if surr.lift {
            v.mul(bubble_tile)
        } else {
            v
        }
    };
    let ubar = lift_mat(ubar_raw.reshape(n_nodes, n_t));
    let dubar = lift_mat(dubar_raw.reshape(n_nodes, n_t));
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    for i in 0..n {
        u.push(lift_mat(umat_raw.slice_cols(i, 1).reshape(n_nodes, n_t)));
        du.push(lift_mat(dumat_raw.slice_cols(i, 1).reshape(n_nodes, n_t)));
    }

    // scale factors over t
    let t_in = tape.constant(Tensor::from_fn(n_t, 1, |s, _| sets.t_nodes[s]));
    let t_tan = tape.constant(Tensor::filled(n_t, 1, 1.0));
    let mut a = Vec::with_capacity(n);
    let mut da = Vec::with_capacity(n);
    for net in &a_nets {
        let (ai, dai) = net.forward_with_tangent(t_in, t_tan);
        a.push(ai.reshape(1, n_t));
        da.push(dai.reshape(1, n_t));
    }

    // stochastic coefficients over (t, ξ), t-major rows
    let ty = tape.constant(Tensor::from_fn(n_t * n_xi, 1 + d, |r, c| {
        let (s, l) = (r / n_xi, r % n_xi);
        if c == 0 {
            sets.t_nodes[s]
        } else {
            sets.xi.points.get(l, c - 1)
        }
    }));
    let ty_tan = tape.constant(Tensor::from_fn(n_t * n_xi, 1 + d, |_, c| {
        if c == 0 {
            1.0
        } else {
            0.0
        }
    }));
    let (ymat_raw, dymat_raw) = y_net.forward_with_tangent(ty, ty_tan);
    let mut y = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for i in 0..n {
        y.push(ymat_raw.slice_cols(i, 1).reshape(n_t, n_xi));
        dy.push(dymat_raw.slice_cols(i, 1).reshape(n_t, n_xi));
    }

    // components at t₀
    let bubble_col = tape.constant(Tensor::from_fn(n_nodes, 1, |j, _| {
        surr.bubble(ga, gb, nodes[j])
    }));
    let lift_col = |v: Var<'t>| -> Var<'t> {
        if surr.lift {
            v.mul(bubble_col)
        } else {
            v
        }
    };
    let x0 = tape.constant(Tensor::from_fn(n_nodes, 2, |j, c| {
        if c == 0 {
            nodes[j]
        } else {
            sets.t0
        }
    }));
    let ubar_ic = lift_col(ubar_net.forward(x0));
    let u_ic_mat = u_net.forward(x0);
    let u_ic: Vec<Var> = (0..n).map(|i| lift_col(u_ic_mat.slice_cols(i, 1))).collect();
    let t0_in = tape.constant(Tensor::from_raw(1, 1, vec![sets.t0]));
    let a_ic: Vec<Var> = a_nets.iter().map(|net| net.forward(t0_in)).collect();
    let ty0 = tape.constant(Tensor::from_fn(n_xi, 1 + d, |l, c| {
        if c == 0 {
            sets.t0
        } else {
            sets.xi.points.get(l, c - 1)
        }
    }));
    let y_ic_mat = y_net.forward(ty0);
    let y_ic: Vec<Var> = (0..n).map(|i| y_ic_mat.slice_cols(i, 1)).collect();

    // boundary traces unless lifted away
    let (ubar_bc, u_bc) = if surr.lift {
        (None, None)
    } else {
        let xb = tape.constant(Tensor::from_fn(2 * n_t, 2, |r, c| {
            let (edge, s) = (r / n_t, r % n_t);
            if c == 0 {
                if edge == 0 {
                    ga
                } else {
                    gb
                }
            } else {
                sets.t_nodes[s]
            }
        }));
        let ub = ubar_net.forward(xb).reshape(2, n_t);
        let umat_b = u_net.forward(xb);
        let ubs: Vec<Var> = (0..n).map(|i| umat_b.slice_cols(i, 1).reshape(2, n_t)).collect();
        (Some(ub), Some(ubs))
    };

    let ubar_sensors = sensor_xs.map(|xs| {
        let inp = tape.constant(Tensor::from_fn(xs.len(), 2, |r, c| {
            if c == 0 {
                xs[r]
            } else {
                sets.t0
            }
        }));
        let bub = tape.constant(Tensor::from_fn(xs.len(), 1, |r, _| surr.bubble(ga, gb, xs[r])));
        let out = ubar_net.forward(inp);
        if surr.lift {
            out.mul(bub)
        } else {
            out
        }
    });

    let ubar_obs = obs_points.map(|pts| {
        let inp = tape.constant(Tensor::from_fn(pts.len(), 2, |r, c| {
            if c == 0 {
                pts[r].0
            } else {
                pts[r].1
            }
        }));
        let bub =
            tape.constant(Tensor::from_fn(pts.len(), 1, |r, _| surr.bubble(ga, gb, pts[r].0)));
        let out = ubar_net.forward(inp);
        if surr.lift {
            out.mul(bub)
        } else {
            out
        }
    });

    BoundComponents {
        n_modes: n,
        ubar,
        dubar,
        u,
        du,
        a,
        da,
        y,
        dy,
        ubar_ic,
        u_ic,
        a_ic,
        y_ic,
        ubar_bc,
        u_bc,
        ubar_sensors,
        ubar_obs,
    }
}

/// Bind closed-form components as constants (the no-training oracle route).
pub fn bind_exact<'t>(
    tape: &'t Tape,
    exact: &ExactComponents,
    sets: &TrainingSets,
) -> Result<BoundComponents<'t>> {
    let n = exact.n_modes;
    let nodes = sets.grid.nodes();
    let n_nodes = nodes.len();
    let n_t = sets.t_nodes.len();
    let n_xi = sets.xi.len();
    if n_xi == 0 {
        return Err(Error::InvalidArg("empty stochastic set".into()));
    }
    let field = |f: &dyn Fn(f64, f64) -> f64| -> Tensor {
        Tensor::from_fn(n_nodes, n_t, |j, s| f(nodes[j], sets.t_nodes[s]))
    };
    let ubar = tape.constant(field(&|x, t| (exact.mean)(x, t)));
    let dubar = tape.constant(field(&|x, t| (exact.d_mean)(x, t)));
    let mut u = Vec::new();
    let mut du = Vec::new();
    let mut a = Vec::new();
    let mut da = Vec::new();
    let mut y = Vec::new();
    let mut dy = Vec::new();
    for i in 0..n {
        u.push(tape.constant(field(&|x, t| (exact.mode)(i, x, t))));
        du.push(tape.constant(field(&|x, t| (exact.d_mode)(i, x, t))));
        a.push(tape.constant(Tensor::from_fn(1, n_t, |_, s| (exact.scale)(i, sets.t_nodes[s]))));
        da.push(tape.constant(Tensor::from_fn(1, n_t, |_, s| (exact.d_scale)(i, sets.t_nodes[s]))));
        y.push(tape.constant(Tensor::from_fn(n_t, n_xi, |s, l| {
            (exact.coeff)(i, sets.t_nodes[s], sets.xi.point(l))
        })));
        dy.push(tape.constant(Tensor::from_fn(n_t, n_xi, |s, l| {
            (exact.d_coeff)(i, sets.t_nodes[s], sets.xi.point(l))
        })));
    }
    let ubar_ic = tape.constant(Tensor::from_fn(n_nodes, 1, |j, _| (exact.mean)(nodes[j], sets.t0)));
    let u_ic = (0..n)
        .map(|i| tape.constant(Tensor::from_fn(n_nodes, 1, |j, _| (exact.mode)(i, nodes[j], sets.t0))))
        .collect();
    let a_ic = (0..n)
        .map(|i| tape.constant(Tensor::scalar((exact.scale)(i, sets.t0))))
        .collect();
    let y_ic = (0..n)
        .map(|i| {
            tape.constant(Tensor::from_fn(n_xi, 1, |l, _| {
                (exact.coeff)(i, sets.t0, sets.xi.point(l))
            }))
        })
        .collect();
    let (ga, gb) = (sets.grid.a, sets.grid.b);
    let ubar_bc = tape.constant(Tensor::from_fn(2, n_t, |e, s| {
        (exact.mean)(if e == 0 { ga } else { gb }, sets.t_nodes[s])
    }));
    let u_bc = (0..n)
        .map(|i| {
            tape.constant(Tensor::from_fn(2, n_t, |e, s| {
                (exact.mode)(i, if e == 0 { ga } else { gb }, sets.t_nodes[s])
            }))
        })
        .collect();
    Ok(BoundComponents {
        n_modes: n,
        ubar,
        dubar,
        u,
        du,
        a,
        da,
        y,
        dy,
        ubar_ic,
        u_ic,
        a_ic,
        y_ic,
        ubar_bc: Some(ubar_bc),
        u_bc: Some(u_bc),
        ubar_sensors: None,
        ubar_obs: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::exact::cross;
    use crate::stochastic::VariableLaw;

    #[test]
    fn surrogate_with_zero_modes_is_the_mean_net() {
        let cfg = SurrogateConfig { n_modes: 0, ubar: (2, 8), a: (1, 2), u: (1, 2), y: (1, 2), lift: false };
        let s = BoSurrogate::new(&cfg, 0, 3);
        let xs = [0.2, 0.5, 0.8];
        let f = s.eval_field((0.0, 1.0), &xs, 0.4, &[]);
        let m = s.eval_mean((0.0, 1.0), &[(0.2, 0.4), (0.5, 0.4), (0.8, 0.4)]);
        for (a, b) in f.iter().zip(&m) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn exact_components_reproduce_the_manufactured_solution() {
        let exact = ExactComponents::manufactured_cross();
        let xi = [0.7, 0.2];
        for &(x, t) in &[(0.3, 0.4), (0.6, 1.2)] {
            let mut v = (exact.mean)(x, t);
            for i in 0..2 {
                v += (exact.scale)(i, t) * (exact.mode)(i, x, t) * (exact.coeff)(i, t, &xi);
            }
            assert!((v - cross::solution(x, t, &xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_invariance_of_the_triple_product() {
        // doubling A_i and halving Y_i leaves the assembled field unchanged
        let cfg = SurrogateConfig { n_modes: 1, ubar: (2, 8), a: (2, 4), u: (2, 8), y: (2, 8), lift: false };
        let mut s = BoSurrogate::new(&cfg, 2, 5);
        let xs: Vec<f64> = (0..9).map(|k| 0.1 * (k + 1) as f64).collect();
        let before = s.eval_field((0.0, 1.0), &xs, 0.3, &[0.4, 0.6]);

        // scale a0's output layer by 2 and y's output column 0 by 1/2
        let w = s.store.get_mut("a0.w2");
        for v in w.data_mut() {
            *v *= 2.0;
        }
        let b = s.store.get_mut("a0.b2");
        for v in b.data_mut() {
            *v *= 2.0;
        }
        let w = s.store.get_mut("y.w2");
        let cols = w.cols();
        for r in 0..w.rows() {
            let v = w.get(r, 0) * 0.5;
            w.set(r, 0, v);
        }
        let _ = cols;
        let b = s.store.get_mut("y.b2");
        let v0 = b.get(0, 0) * 0.5;
        b.set(0, 0, v0);

        let after = s.eval_field((0.0, 1.0), &xs, 0.3, &[0.4, 0.6]);
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn hard_lifting_zeroes_mean_and_modes_at_the_boundary() {
        let cfg = SurrogateConfig { n_modes: 2, ubar: (2, 8), a: (1, 2), u: (2, 8), y: (2, 8), lift: true };
        let s = BoSurrogate::new(&cfg, 2, 9);
        let f = s.eval_field((-1.0, 1.0), &[-1.0, 0.0, 1.0], 0.5, &[0.3, -0.7]);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[2], 0.0);
        let m = s.eval_mode(0, (-1.0, 1.0), &[-1.0, 1.0], 0.5);
        assert_eq!(m, vec![0.0, 0.0]);
        let _ = VariableLaw::UniformSym;
    }
}
