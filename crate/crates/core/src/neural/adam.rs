use super::{Gradients, PolicyParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 2.5e-4, beta1: 0.9, beta2: 0.999, eps: 1e-5 }
    }
}

/// First and second moment estimates plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: PolicyParams,
    pub v: PolicyParams,
    pub step: u64,
}

impl Default for AdamState {
    fn default() -> Self {
        Self { m: PolicyParams::zeros(), v: PolicyParams::zeros(), step: 0 }
    }
}

/// One bias-corrected Adam update; `state.step` is advanced before use.
pub fn adam_step(params: &mut PolicyParams, grads: &Gradients, state: &mut AdamState, cfg: &AdamConfig) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let p = params.as_mut_slice();
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (((pi, &gi), mi), vi) in p.iter_mut().zip(grads.as_slice()).zip(m).zip(v) {
        *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
        *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *pi -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(g: f64) -> Gradients {
        let mut grads = Gradients::zeros();
        grads.as_mut_slice()[0] = g;
        grads
    }

    #[test]
    fn first_step_hand_oracle() {
        let cfg = AdamConfig::default();
        let mut p = PolicyParams::zeros();
        let mut s = AdamState::default();
        adam_step(&mut p, &single(0.3), &mut s, &cfg);
        // m_hat = 0.3, v_hat = 0.09 after bias correction
        let expected = -2.5e-4 * 0.3 / (0.3 + 1e-5);
        assert!((p.as_slice()[0] - expected).abs() < 1e-18);
        assert!((p.as_slice()[0] - -2.49991667e-4).abs() < 1e-12);
        assert!(p.as_slice()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn repeated_gradient_does_not_grow_step() {
        let cfg = AdamConfig::default();
        let mut p = PolicyParams::zeros();
        let mut s = AdamState::default();
        adam_step(&mut p, &single(0.3), &mut s, &cfg);
        let first = p.as_slice()[0];
        adam_step(&mut p, &single(0.3), &mut s, &cfg);
        let second = p.as_slice()[0] - first;
        assert!(second.abs() <= first.abs());
        assert_eq!(s.step, 2);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = PolicyParams::zeros();
        p.as_mut_slice()[3] = 1.5;
        let before = p.clone();
        adam_step(&mut p, &Gradients::zeros(), &mut AdamState::default(), &AdamConfig::default());
        assert_eq!(p, before);
    }
}
