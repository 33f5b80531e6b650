//! TD errors, generalized advantage estimation, value-regression targets,
//! and optimistic advantage shaping (Leaky-ReLU with slope eta; eta = 0 is
//! clip-at-zero, eta = 1 leaves advantages untouched).

use std::fmt;

/// How raw advantages are rescaled before shaping. Never subtracts a mean:
/// mean subtraction would flip signs and corrupt the optimism semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    #[default]
    None,
    /// Divide by the batch standard deviation of the raw advantages
    /// (floored at 1e-8), computed before shaping.
    StdOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageConfig {
    pub gamma: f64,
    pub lam: f64,
    pub eta: f64,
    pub scale_mode: ScaleMode,
}

#[derive(Debug, Clone)]
pub struct AdvantageBatch {
    pub raw_adv: Vec<f64>,
    pub shaped_adv: Vec<f64>,
    pub value_targets: Vec<f64>,
    pub td_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdvantageError {
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    EtaOutOfRange(f64),
}

impl fmt::Display for AdvantageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdvantageError::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected length {expected}, got {got}")
            }
            AdvantageError::EtaOutOfRange(eta) => {
                write!(f, "eta must lie in [0, 1], got {eta}")
            }
        }
    }
}

impl std::error::Error for AdvantageError {}

/// One-step TD errors: `delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)`.
///
/// `values[t]` is V(s_t); the value after the final step is `bootstrap_value`
/// (zero when the sequence ends at a terminal state).
pub fn td_errors(
    rewards: &[f64],
    values: &[f64],
    bootstrap_value: f64,
    dones: &[bool],
    gamma: f64,
) -> Result<Vec<f64>, AdvantageError> {
    let n = rewards.len();
    if values.len() != n {
        return Err(AdvantageError::LengthMismatch { what: "values", expected: n, got: values.len() });
    }
    if dones.len() != n {
        return Err(AdvantageError::LengthMismatch { what: "dones", expected: n, got: dones.len() });
    }
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let next_v = if dones[t] {
            0.0
        } else if t + 1 < n {
            values[t + 1]
        } else {
            bootstrap_value
        };
        out.push(rewards[t] + gamma * next_v - values[t]);
    }
    Ok(out)
}

/// Backward GAE recursion `A_t = delta_t + gamma*lam*(1-done_t)*A_{t+1}`.
/// With `lam = 0` this returns the TD errors themselves. Episode boundaries
/// (`dones`) stop the recursion so no credit leaks across episodes.
pub fn gae(
    deltas: &[f64],
    gamma: f64,
    lam: f64,
    dones: &[bool],
) -> Result<Vec<f64>, AdvantageError> {
    if dones.len() != deltas.len() {
        return Err(AdvantageError::LengthMismatch {
            what: "dones",
            expected: deltas.len(),
            got: dones.len(),
        });
    }
    let mut out = vec![0.0; deltas.len()];
    let mut running = 0.0;
    for t in (0..deltas.len()).rev() {
        if dones[t] {
            running = 0.0;
        }
        running = deltas[t] + gamma * lam * running;
        out[t] = running;
    }
    Ok(out)
}

/// Elementwise Leaky-ReLU shaping `LR(A) = max(eta*A, A)` after optional
/// std-only scaling of the raw advantages.
pub fn shape_advantages(
    raw: &[f64],
    eta: f64,
    scale_mode: ScaleMode,
) -> Result<Vec<f64>, AdvantageError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(AdvantageError::EtaOutOfRange(eta));
    }
    let scale = match scale_mode {
        ScaleMode::None => 1.0,
        ScaleMode::StdOnly => {
            let n = raw.len().max(1) as f64;
            let mean = raw.iter().sum::<f64>() / n;
            let var = raw.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
            var.sqrt().max(1e-8)
        }
    };
    Ok(raw
        .iter()
        .map(|&a| {
            let s = a / scale;
            (eta * s).max(s)
        })
        .collect())
}

/// Critic regression targets `target_t = raw_adv_t + V(s_t)` (the lambda
/// return). Targets always use raw advantages, never shaped ones.
pub fn value_targets(raw_adv: &[f64], values: &[f64]) -> Result<Vec<f64>, AdvantageError> {
    if values.len() != raw_adv.len() {
        return Err(AdvantageError::LengthMismatch {
            what: "values",
            expected: raw_adv.len(),
            got: values.len(),
        });
    }
    Ok(raw_adv.iter().zip(values.iter()).map(|(a, v)| a + v).collect())
}

/// Full pipeline: TD errors, GAE, raw-advantage value targets, shaping.
pub fn compute_batch(
    rewards: &[f64],
    values: &[f64],
    bootstrap_value: f64,
    dones: &[bool],
    cfg: &AdvantageConfig,
) -> Result<AdvantageBatch, AdvantageError> {
    let deltas = td_errors(rewards, values, bootstrap_value, dones, cfg.gamma)?;
    let raw = gae(&deltas, cfg.gamma, cfg.lam, dones)?;
    let targets = value_targets(&raw, values)?;
    let shaped = shape_advantages(&raw, cfg.eta, cfg.scale_mode)?;
    Ok(AdvantageBatch {
        raw_adv: raw,
        shaped_adv: shaped,
        value_targets: targets,
        td_errors: deltas,
    })
}
