//! Categorical and diagonal-Gaussian policy heads.

use rand::Rng;
use rand_distr::StandardNormal;

use super::NnError;

const LN_2PI: f64 = 1.8378770664093453; // ln(2*pi)

/// Log-softmax with max subtraction.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - max - lse).collect()
}

/// Entropy of the softmax distribution given its log-probabilities.
pub fn softmax_entropy(log_probs: &[f64]) -> f64 {
    -log_probs.iter().map(|lp| lp.exp() * lp).sum::<f64>()
}

/// Sample (or take the argmax of) a categorical distribution over logits.
/// Returns `(action index, log_prob, entropy)`. Greedy ties break to the
/// lowest index.
pub fn categorical_act<R: Rng>(
    logits: &[f64],
    rng: &mut R,
    greedy: bool,
) -> Result<(usize, f64, f64), NnError> {
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(NnError::NonFinite("logits"));
    }
    let log_probs = log_softmax(logits);
    let entropy = softmax_entropy(&log_probs);
    let action = if greedy {
        let mut best = 0;
        for (i, l) in logits.iter().enumerate() {
            if *l > logits[best] {
                best = i;
            }
        }
        best
    } else {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = log_probs.len() - 1;
        for (i, lp) in log_probs.iter().enumerate() {
            acc += lp.exp();
            if u < acc {
                chosen = i;
                break;
            }
        }
        chosen
    };
    Ok((action, log_probs[action], entropy))
}

/// Log density of a diagonal Gaussian at `action`.
pub fn gaussian_log_prob(action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) / log_std[i].exp();
        lp += -0.5 * z * z - log_std[i] - 0.5 * LN_2PI;
    }
    lp
}

/// Sample (or take the mean of) a diagonal Gaussian. Returns the raw,
/// unclamped action and its log density; callers clamp to environment
/// bounds afterwards.
pub fn gaussian_act<R: Rng>(
    mean: &[f64],
    log_std: &[f64],
    rng: &mut R,
    greedy: bool,
) -> Result<(Vec<f64>, f64), NnError> {
    if mean.iter().chain(log_std.iter()).any(|x| !x.is_finite()) {
        return Err(NnError::NonFinite("gaussian parameters"));
    }
    let action: Vec<f64> = if greedy {
        mean.to_vec()
    } else {
        mean.iter()
            .zip(log_std.iter())
            .map(|(m, ls)| {
                let z: f64 = rng.sample(StandardNormal);
                m + ls.exp() * z
            })
            .collect()
    };
    let lp = gaussian_log_prob(&action, mean, log_std);
    Ok((action, lp))
}
