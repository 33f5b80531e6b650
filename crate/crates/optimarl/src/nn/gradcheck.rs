//! Central finite-difference gradient verification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Grads, Mlp};

/// Compares an analytic gradient against central finite differences on
/// `probe_count` randomly chosen parameter coordinates and returns the
/// maximum relative error seen.
///
/// `loss_and_grad` must be deterministic in the parameters. The probe step
/// is 1e-5; relative error is |fd - analytic| / max(|fd|, |analytic|, 1e-8).
pub fn finite_diff_check<F>(mlp: &Mlp, loss_and_grad: F, probe_count: usize, seed: u64) -> f64
where
    F: Fn(&Mlp) -> (f64, Grads),
{
    let h = 1e-5;
    let (_, analytic) = loss_and_grad(mlp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    for _ in 0..probe_count {
        let li = rng.gen_range(0..mlp.layers.len());
        let in_w = rng.gen_bool(
            mlp.layers[li].w.len() as f64
                / (mlp.layers[li].w.len() + mlp.layers[li].b.len()) as f64,
        );
        let idx = if in_w {
            rng.gen_range(0..mlp.layers[li].w.len())
        } else {
            rng.gen_range(0..mlp.layers[li].b.len())
        };
        let mut plus = mlp.clone();
        let mut minus = mlp.clone();
        {
            let (p, m) = if in_w {
                (&mut plus.layers[li].w[idx], &mut minus.layers[li].w[idx])
            } else {
                (&mut plus.layers[li].b[idx], &mut minus.layers[li].b[idx])
            };
            *p += h;
            *m -= h;
        }
        let (lp, _) = loss_and_grad(&plus);
        let (lm, _) = loss_and_grad(&minus);
        let fd = (lp - lm) / (2.0 * h);
        let an = if in_w {
            analytic.layers[li].w[idx]
        } else {
            analytic.layers[li].b[idx]
        };
        let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    max_rel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{log_softmax, Mlp};

    #[test]
    fn linear_loss_is_exact() {
        // L = sum of all parameters: gradient is exactly 1 everywhere.
        let mlp = Mlp::init(&[3, 4, 2], 11).unwrap();
        let err = finite_diff_check(
            &mlp,
            |m| {
                let loss: f64 = m
                    .layers
                    .iter()
                    .map(|l| l.w.iter().sum::<f64>() + l.b.iter().sum::<f64>())
                    .sum();
                let mut g = crate::nn::Grads::zeros_like(m);
                for l in &mut g.layers {
                    for x in l.w.iter_mut().chain(l.b.iter_mut()) {
                        *x = 1.0;
                    }
                }
                (loss, g)
            },
            20,
            0,
        );
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn categorical_log_prob_loss_matches() {
        // L = -log pi(a0 | x) for a fixed action on a random net.
        let mlp = Mlp::init(&[4, 16, 3], 5).unwrap();
        let x = [0.4, -0.2, 0.9, 1.3];
        let action = 1usize;
        let err = finite_diff_check(
            &mlp,
            |m| {
                let (logits, cache) = m.forward(&x, 1).unwrap();
                let lp = log_softmax(&logits);
                let loss = -lp[action];
                // d(-lp[a])/dlogits = p - onehot(a)
                let mut dout: Vec<f64> = lp.iter().map(|l| l.exp()).collect();
                dout[action] -= 1.0;
                (loss, m.backward(&cache, &dout).unwrap())
            },
            20,
            1,
        );
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn value_regression_loss_matches() {
        let mlp = Mlp::init(&[4, 16, 1], 6).unwrap();
        let x = [0.1, 0.2, -0.3, 0.7];
        let target = 1.75;
        let err = finite_diff_check(
            &mlp,
            |m| {
                let (v, cache) = m.forward(&x, 1).unwrap();
                let loss = 0.5 * (v[0] - target) * (v[0] - target);
                let dout = [v[0] - target];
                (loss, m.backward(&cache, &dout).unwrap())
            },
            20,
            2,
        );
        assert!(err < 1e-4, "relative error {err}");
    }
}
