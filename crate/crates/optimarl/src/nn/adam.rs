//! Adam with bias correction, operating on flat parameter blocks.

use super::NnError;

/// Optimizer state. Moment shapes mirror the parameter blocks handed to
/// [`AdamState::step`]; `step_count` increments by exactly one per update.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_stability: f64,
}

impl AdamState {
    pub fn new(block_lens: &[usize], lr: f64) -> Self {
        AdamState {
            first_moment: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: block_lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps_stability: 1e-8,
        }
    }

    /// One Adam update. Rejects non-finite gradients so NaN sources surface
    /// at the step that produced them.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(NnError::ShapeMismatch {
                expected: self.first_moment.len(),
                got: params.len().min(grads.len()),
            });
        }
        for g in grads {
            if g.iter().any(|x| !x.is_finite()) {
                return Err(NnError::NonFinite("gradient"));
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            if p.len() != g.len() || p.len() != m.len() {
                return Err(NnError::ShapeMismatch {
                    expected: m.len(),
                    got: p.len(),
                });
            }
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps_stability);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut opt = AdamState::new(&[3], 0.01);
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![0.0; 3];
        opt.step(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(opt.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let lr = 0.01;
        let mut opt = AdamState::new(&[2], lr);
        let mut p = vec![0.0, 0.0];
        let g = vec![3.7, -0.002];
        opt.step(&mut [&mut p], &[&g]).unwrap();
        // bias-corrected first step: m_hat = g, v_hat = g^2 => update ~= lr*sign(g)
        assert!((p[0] + lr).abs() < lr * 1e-4, "p[0] = {}", p[0]);
        assert!((p[1] - lr).abs() < lr * 1e-3, "p[1] = {}", p[1]);
    }

    #[test]
    fn two_runs_are_bit_identical() {
        let run = || {
            let mut opt = AdamState::new(&[4], 0.003);
            let mut p = vec![0.1, 0.2, 0.3, 0.4];
            for k in 0..50 {
                let g: Vec<f64> = p.iter().map(|x| (x * 2.0 + k as f64 * 0.01).sin()).collect();
                opt.step(&mut [&mut p], &[&g]).unwrap();
            }
            p
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let mut opt = AdamState::new(&[1], 0.01);
        let mut p = vec![1.0];
        let g = vec![f64::NAN];
        assert!(opt.step(&mut [&mut p], &[&g]).is_err());
        let g = vec![f64::INFINITY];
        assert!(opt.step(&mut [&mut p], &[&g]).is_err());
    }
}
