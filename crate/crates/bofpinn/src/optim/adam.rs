//! Adam with bias correction and a stepped exponential learning-rate decay.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AdamConfig {
    /// Base learning rate.
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Drop the rate by `decay_rate` every `decay_every` steps (0 disables).
    pub decay_every: usize,
    pub decay_rate: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay_every: 1000,
            decay_rate: 0.9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdamState {
    pub cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n: usize, cfg: AdamConfig) -> Self {
        Self { cfg, m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Effective rate at a given (1-based) step: `lr * rate^floor(step/every)`.
    pub fn effective_lr(&self, step: u64) -> f64 {
        if self.cfg.decay_every == 0 {
            return self.cfg.lr;
        }
        let drops = step / self.cfg.decay_every as u64;
        self.cfg.lr * self.cfg.decay_rate.powi(drops as i32)
    }

    /// One update. A non-finite gradient is an error and leaves parameters
    /// and moments untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam: params {} / grads {} vs state {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        if let Some(k) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {k}")));
        }
        let t = self.step + 1;
        let lr = self.effective_lr(t);
        let (b1, b2, eps) = (self.cfg.beta1, self.cfg.beta2, self.cfg.eps);
        let bc1 = 1.0 - b1.powi(t as i32);
        let bc2 = 1.0 - b2.powi(t as i32);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * grads[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * grads[i] * grads[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
        self.step = t;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_matches_hand_evaluation() {
        // theta = 0, g = 2, defaults: update is -lr * g / (|g| + eps).
        let mut st = AdamState::new(1, AdamConfig::default());
        let mut p = vec![0.0];
        st.step(&mut p, &[2.0]).unwrap();
        let expect = -1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] - expect).abs() < 1e-12, "{} vs {expect}", p[0]);
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut st = AdamState::new(3, AdamConfig::default());
        let mut p = vec![0.5, -1.0, 2.0];
        for _ in 0..10 {
            st.step(&mut p, &[0.0, 0.0, 0.0]).unwrap();
        }
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn decay_schedule_drops_at_interval() {
        let st = AdamState::new(1, AdamConfig::default());
        assert!((st.effective_lr(1) - 1e-3).abs() < 1e-18);
        assert!((st.effective_lr(999) - 1e-3).abs() < 1e-18);
        assert!((st.effective_lr(1000) - 9.0e-4).abs() < 1e-18);
        assert!((st.effective_lr(2000) - 8.1e-4).abs() < 1e-18);
    }

    #[test]
    fn nan_gradient_leaves_state_unmodified() {
        let mut st = AdamState::new(2, AdamConfig::default());
        let mut p = vec![1.0, 2.0];
        st.step(&mut p, &[0.1, 0.2]).unwrap();
        let p_before = p.clone();
        let step_before = st.step_count();
        assert!(st.step(&mut p, &[f64::NAN, 0.0]).is_err());
        assert_eq!(p, p_before);
        assert_eq!(st.step_count(), step_before);
    }

    #[test]
    fn converges_on_quadratic() {
        let mut st = AdamState::new(1, AdamConfig { decay_every: 0, ..AdamConfig::default() });
        let mut p = vec![5.0];
        for _ in 0..20000 {
            let g = 2.0 * (p[0] - 3.0);
            st.step(&mut p, &[g]).unwrap();
        }
        assert!((p[0] - 3.0).abs() < 1e-4);
    }
}
