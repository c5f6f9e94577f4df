//! Optimization drivers for the bi-orthogonal surrogate: forward training
//! (Adam then L-BFGS, optional dynamic loss weights and time-window
//! decomposition), joint inverse training with trainable (μ, ε, α),
//! fine-tuning from a checkpoint at a different fractional order, and
//! statistics prediction.

use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::fracops::GlOrder;
use crate::nn::ParamBinding;
use crate::optim::{lbfgs_minimize, AdamConfig, AdamState, LbfgsConfig, StopReason};
use crate::problems::Problem1D;
use crate::solvers::EnsembleStats;
use crate::stochastic::SampleSet;
use crate::tensor::Tensor;

use super::loss::{
    update_dynamic_weights, DynamicWeights, IcTargets, LossParts, LossWeights, LossWorkspace,
    PdeCoeffs,
};
use super::sets::TrainingSets;
use super::{bind_networks, BoSurrogate, SurrogateConfig};

#[derive(Clone, Debug)]
pub struct Schedule {
    pub adam_iters: usize,
    pub adam: AdamConfig,
    pub lbfgs: LbfgsConfig,
    pub weights: LossWeights,
    pub dynamic: Option<DynamicWeights>,
    /// Weight of the observation mismatch in inverse mode.
    pub lambda_data: f64,
    pub record_every: usize,
}

impl Schedule {
    pub fn quick(adam_iters: usize, weights: LossWeights) -> Self {
        Self {
            adam_iters,
            adam: AdamConfig::default(),
            lbfgs: LbfgsConfig { max_iters: 200, ..LbfgsConfig::default() },
            weights,
            dynamic: None,
            lambda_data: 100.0,
            record_every: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HistoryRow {
    pub iter: usize,
    pub parts: LossParts,
    pub total: f64,
    pub lambda: LossWeights,
    /// (μ, ε, α) when inverse parameters are being trained.
    pub inverse: Option<(f64, f64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    pub rows: Vec<HistoryRow>,
    pub final_loss: f64,
    pub adam_iterations: usize,
    pub lbfgs_iterations: usize,
}

impl TrainHistory {
    pub fn total_iterations(&self) -> usize {
        self.adam_iterations + self.lbfgs_iterations
    }
}

/// Raw trainable scalars of the inverse problem and their constrained maps.
/// The fractional order is kept inside (1, 2) by `α = 0.5 tanh(θ_α) + 1.5`.
#[derive(Clone, Copy, Debug)]
pub struct InverseParams {
    pub theta_mu: f64,
    pub theta_eps: f64,
    pub theta_alpha: f64,
}

impl InverseParams {
    /// The initialization used by the inverse benchmark:
    /// μ = 1, ε = 1, α = 0.5 tanh(0.2) + 1.5.
    pub fn initial_guess() -> Self {
        Self { theta_mu: 1.0, theta_eps: 1.0, theta_alpha: 0.2 }
    }

    pub fn mu(&self) -> f64 {
        self.theta_mu
    }

    pub fn epsilon(&self) -> f64 {
        self.theta_eps
    }

    pub fn alpha(&self) -> f64 {
        0.5 * self.theta_alpha.tanh() + 1.5
    }
}

#[derive(Clone, Debug)]
pub struct InverseResult {
    pub mu: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

struct FitOutcome {
    history: TrainHistory,
    best_flat: Vec<f64>,
}

/// Shared Adam + L-BFGS loop over a loss closure. The closure fills
/// gradients and returns all loss parts; `inverse_of` extracts the mapped
/// inverse parameters from a flat vector for history rows.
#[allow(clippy::too_many_arguments)]
fn fit<F, I>(
    mut flat: Vec<f64>,
    schedule: &Schedule,
    mut eval: F,
    mut grad_norms: impl FnMut(&[f64]) -> Option<(f64, [f64; 4])>,
    inverse_of: I,
) -> Result<FitOutcome>
where
    F: FnMut(&[f64], &mut [f64], &LossWeights) -> (f64, LossParts),
    I: Fn(&[f64]) -> Option<(f64, f64, f64)>,
{
    let mut weights = schedule.weights;
    weights.validate()?;
    let mut adam = AdamState::new(flat.len(), schedule.adam.clone());
    let mut grad = vec![0.0; flat.len()];
    let mut history = TrainHistory::default();
    let mut best = (f64::INFINITY, flat.clone());

    for it in 0..schedule.adam_iters {
        if let Some(dyn_cfg) = &schedule.dynamic {
            if dyn_cfg.interval > 0 && it % dyn_cfg.interval == 0 && it > 0 {
                if let Some((nw, nk)) = grad_norms(&flat) {
                    update_dynamic_weights(&mut weights, dyn_cfg, nw, nk);
                }
            }
        }
        let (total, parts) = eval(&flat, &mut grad, &weights);
        if !total.is_finite() {
            return Err(Error::Diverged { iter: it, what: "loss became non-finite".into() });
        }
        if total < best.0 {
            best = (total, flat.clone());
        }
        if it % schedule.record_every == 0 {
            history.rows.push(HistoryRow {
                iter: it,
                parts,
                total,
                lambda: weights,
                inverse: inverse_of(&flat),
            });
        }
        adam.step(&mut flat, &grad)?;
    }
    history.adam_iterations = schedule.adam_iters;

    // L-BFGS phase sees frozen weights so the objective is deterministic
    let report = lbfgs_minimize(
        |x, g| eval(x, g, &weights).0,
        &mut flat,
        &schedule.lbfgs,
    );
    history.lbfgs_iterations = report.iterations;
    if report.final_value.is_finite() && report.final_value < best.0 {
        best = (report.final_value, flat.clone());
    }
    let (total, parts) = eval(&best.1, &mut grad, &weights);
    history.rows.push(HistoryRow {
        iter: history.total_iterations(),
        parts,
        total,
        lambda: weights,
        inverse: inverse_of(&best.1),
    });
    history.final_loss = best.0;
    Ok(FitOutcome { history, best_flat: best.1 })
}

/// Forward training of one surrogate on one time window.
pub fn train(
    surr: &mut BoSurrogate,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    schedule: &Schedule,
    ic: IcTargets,
) -> Result<TrainHistory> {
    let sensor_xs = ic.sensor_xs().map(|v| v.to_vec());
    let ws = LossWorkspace::build(problem, sets, order, surr.n_modes, ic)?;
    let mut store = surr.store.clone();
    let surr_ro = surr.clone();

    let eval = |flat: &[f64], grad: &mut [f64], weights: &LossWeights| -> (f64, LossParts) {
        store.unflatten(flat).expect("flat size fixed");
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store);
        let bound = bind_networks(&tape, &binding, &surr_ro, sets, sensor_xs.as_deref(), None);
        let terms = ws.terms(&tape, &bound, &PdeCoeffs::Fixed);
        let total = terms.weighted(weights, schedule.lambda_data);
        if let Ok(g) = tape.backward(total) {
            grad.copy_from_slice(&binding.flat_grads(&g));
        }
        (total.item(), terms.values())
    };

    let mut store2 = surr.store.clone();
    let grad_norms = |flat: &[f64]| -> Option<(f64, [f64; 4])> {
        store2.unflatten(flat).ok()?;
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store2);
        let bound = bind_networks(&tape, &binding, &surr_ro, sets, sensor_xs.as_deref(), None);
        let terms = ws.terms(&tape, &bound, &PdeCoeffs::Fixed);
        let norm = |v| {
            tape.backward(v)
                .ok()
                .map(|g| binding.flat_grads(&g).iter().map(|x| x * x).sum::<f64>().sqrt())
        };
        Some((
            norm(terms.w)?,
            [norm(terms.ic)?, norm(terms.bc)?, norm(terms.bo)?, norm(terms.g)?],
        ))
    };

    let out = fit(surr.store.flatten(), schedule, eval, grad_norms, |_| None)?;
    surr.store.unflatten(&out.best_flat)?;
    Ok(out.history)
}

/// Trained window stack: one surrogate per time slab, later windows taking
/// their initial targets from the previous window's trained surrogate at the
/// interface time.
#[derive(Debug)]
pub struct TrainedWindows {
    pub cuts: Vec<f64>,
    pub windows: Vec<BoSurrogate>,
}

impl TrainedWindows {
    pub fn window_for(&self, t: f64) -> &BoSurrogate {
        let k = self
            .cuts
            .windows(2)
            .position(|w| t <= w[1])
            .unwrap_or(self.windows.len() - 1);
        &self.windows[k]
    }
}

/// Sequential training over `n_windows` equal time slabs.
#[allow(clippy::too_many_arguments)]
pub fn train_windowed(
    cfg: &SurrogateConfig,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    schedule: &Schedule,
    ic: IcTargets,
    n_windows: usize,
    seed: u64,
) -> Result<(TrainedWindows, Vec<TrainHistory>)> {
    if n_windows == 0 {
        return Err(Error::InvalidArg("need at least one window".into()));
    }
    let span = sets.t1 - sets.t0;
    let cuts: Vec<f64> = (0..=n_windows)
        .map(|k| sets.t0 + span * k as f64 / n_windows as f64)
        .collect();
    let n_t_w = sets.n_t().div_ceil(n_windows);
    let mut windows = Vec::with_capacity(n_windows);
    let mut histories = Vec::with_capacity(n_windows);
    let mut ic_now = ic;
    for w in 0..n_windows {
        let sets_w = sets.window(cuts[w], cuts[w + 1], n_t_w, seed.wrapping_add(w as u64));
        let mut surr = BoSurrogate::new(cfg, problem.xi_dim().max(1), seed.wrapping_add(1000 + w as u64));
        let hist = train(&mut surr, problem, &sets_w, order, schedule, ic_now.clone())?;
        histories.push(hist);
        if w + 1 < n_windows {
            let sets_next =
                sets.window(cuts[w + 1], cuts[w + 2], n_t_w, seed.wrapping_add(w as u64 + 1));
            ic_now = IcTargets::from_surrogate(&surr, (problem.a, problem.b), &sets_next);
        }
        windows.push(surr);
    }
    Ok((TrainedWindows { cuts, windows }, histories))
}

/// Joint training of the networks and (μ, ε, α) against mean observations.
#[allow(clippy::too_many_arguments)]
pub fn train_inverse(
    surr: &mut BoSurrogate,
    problem: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    schedule: &Schedule,
    ic: IcTargets,
    observations: &[((f64, f64), f64)],
    init: InverseParams,
) -> Result<(TrainHistory, InverseResult)> {
    if observations.is_empty() {
        return Err(Error::InvalidArg("empty observation set".into()));
    }
    let obs_points: Vec<(f64, f64)> = observations.iter().map(|(p, _)| *p).collect();
    let obs_values: Vec<f64> = observations.iter().map(|(_, v)| *v).collect();
    let sensor_xs = ic.sensor_xs().map(|v| v.to_vec());
    let ws = LossWorkspace::build(problem, sets, order, surr.n_modes, ic)?
        .with_observations(obs_points.clone(), obs_values)?;

    // append the raw inverse scalars to the parameter store
    if !surr.store.contains("inv.theta_mu") {
        surr.store.insert("inv.theta_mu", Tensor::scalar(init.theta_mu));
        surr.store.insert("inv.theta_eps", Tensor::scalar(init.theta_eps));
        surr.store.insert("inv.theta_alpha", Tensor::scalar(init.theta_alpha));
    }
    let mut store = surr.store.clone();
    let surr_ro = surr.clone();
    let theta_alpha_idx = store.flatten().len() - 1;
    let inverse_of = move |flat: &[f64]| -> Option<(f64, f64, f64)> {
        let p = InverseParams {
            theta_mu: flat[theta_alpha_idx - 2],
            theta_eps: flat[theta_alpha_idx - 1],
            theta_alpha: flat[theta_alpha_idx],
        };
        Some((p.mu(), p.epsilon(), p.alpha()))
    };

    let eval = |flat: &[f64], grad: &mut [f64], weights: &LossWeights| -> (f64, LossParts) {
        store.unflatten(flat).expect("flat size fixed");
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store);
        let bound = bind_networks(
            &tape,
            &binding,
            &surr_ro,
            sets,
            sensor_xs.as_deref(),
            Some(&obs_points),
        );
        let mu = binding.var("inv.theta_mu");
        let eps = binding.var("inv.theta_eps");
        let alpha = binding.var("inv.theta_alpha").tanh().scale(0.5).add_const(1.5);
        let stencil = ws.stencil_at(alpha.item()).expect("order stays in (1,2)");
        let coeffs = PdeCoeffs::Trainable { mu, eps, alpha, stencil };
        let terms = ws.terms(&tape, &bound, &coeffs);
        let total = terms.weighted(weights, schedule.lambda_data);
        if let Ok(g) = tape.backward(total) {
            grad.copy_from_slice(&binding.flat_grads(&g));
        }
        (total.item(), terms.values())
    };

    let out = fit(surr.store.flatten(), schedule, eval, |_| None, inverse_of)?;
    surr.store.unflatten(&out.best_flat)?;
    let flat = surr.store.flatten();
    let p = InverseParams {
        theta_mu: flat[theta_alpha_idx - 2],
        theta_eps: flat[theta_alpha_idx - 1],
        theta_alpha: flat[theta_alpha_idx],
    };
    Ok((
        out.history,
        InverseResult { mu: p.mu(), epsilon: p.epsilon(), alpha: p.alpha() },
    ))
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    pub iterations: usize,
    pub final_loss: f64,
    pub reached_target: bool,
}

/// Fine-tune a source-order surrogate on a target-order problem with the
/// quasi-Newton optimizer only. `target_loss` stops the run as soon as the
/// from-scratch reference loss is reached.
pub fn transfer_finetune(
    surr: &mut BoSurrogate,
    problem_target: &Problem1D,
    sets: &TrainingSets,
    order: GlOrder,
    weights: &LossWeights,
    lbfgs: &LbfgsConfig,
    ic: IcTargets,
) -> Result<(TrainHistory, TransferReport)> {
    weights.validate()?;
    let sensor_xs = ic.sensor_xs().map(|v| v.to_vec());
    let ws = LossWorkspace::build(problem_target, sets, order, surr.n_modes, ic)?;
    let mut store = surr.store.clone();
    let surr_ro = surr.clone();
    let mut flat = surr.store.flatten();
    let mut history = TrainHistory::default();

    let mut eval = |flat: &[f64], grad: &mut [f64]| -> f64 {
        store.unflatten(flat).expect("flat size fixed");
        let tape = Tape::new();
        let binding = ParamBinding::bind(&tape, &store);
        let bound = bind_networks(&tape, &binding, &surr_ro, sets, sensor_xs.as_deref(), None);
        let terms = ws.terms(&tape, &bound, &PdeCoeffs::Fixed);
        let total = terms.weighted(weights, 0.0);
        if let Ok(g) = tape.backward(total) {
            grad.copy_from_slice(&binding.flat_grads(&g));
        }
        total.item()
    };

    let report = lbfgs_minimize(&mut eval, &mut flat, lbfgs);
    surr.store.unflatten(&flat)?;
    history.lbfgs_iterations = report.iterations;
    history.final_loss = report.final_value;
    Ok((
        history,
        TransferReport {
            iterations: report.iterations,
            final_loss: report.final_value,
            reached_target: report.stop == StopReason::TargetReached,
        },
    ))
}

/// Mean and variance of the assembled surrogate over a sample set, per
/// evaluation time, on the given x nodes.
pub fn predict_stats(
    surr: &BoSurrogate,
    domain: (f64, f64),
    xs: &[f64],
    times: &[f64],
    samples: &SampleSet,
) -> EnsembleStats {
    let mut stats = EnsembleStats { times: times.to_vec(), mean: Vec::new(), var: Vec::new() };
    for &t in times {
        let points: Vec<(f64, f64)> = xs.iter().map(|&x| (x, t)).collect();
        let ubar = surr.eval_mean(domain, &points);
        let modes: Vec<Vec<f64>> =
            (0..surr.n_modes).map(|i| surr.eval_mode(i, domain, xs, t)).collect();
        let scales: Vec<f64> = (0..surr.n_modes).map(|i| surr.eval_scale(i, &[t])[0]).collect();
        let coeffs: Vec<Vec<f64>> =
            (0..surr.n_modes).map(|i| surr.eval_coeff(i, t, &samples.points)).collect();
        let mut mean = vec![0.0; xs.len()];
        let mut var = vec![0.0; xs.len()];
        for l in 0..samples.len() {
            let w = samples.weights[l];
            for (k, m) in mean.iter_mut().enumerate() {
                let mut v = ubar[k];
                for i in 0..surr.n_modes {
                    v += scales[i] * modes[i][k] * coeffs[i][l];
                }
                *m += w * v;
            }
        }
        for l in 0..samples.len() {
            let w = samples.weights[l];
            for (k, vv) in var.iter_mut().enumerate() {
                let mut v = ubar[k];
                for i in 0..surr.n_modes {
                    v += scales[i] * modes[i][k] * coeffs[i][l];
                }
                let d = v - mean[k];
                *vv += w * d * d;
            }
        }
        stats.mean.push(mean);
        stats.var.push(var);
    }
    stats
}
