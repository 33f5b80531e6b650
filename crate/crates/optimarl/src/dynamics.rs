//! Exact (sample-free) expected-update recurrence on 3x3 matrix games:
//! softmax policy iteration with and without an optimistic update.
//!
//! The non-optimistic step scores each action against the other agent's
//! current marginal. The optimistic step scores each action by the best
//! joint payoff it enables, as an advantage over the current joint value,
//! clipped at zero: `Q_i = V + max(max_j R(i,j) - V, 0)`. Negative
//! prospects never push an action's score below the baseline, so early
//! miscoordination cannot bury the globally optimal action.

use std::fmt;

pub const SIMPLEX_TOL: f64 = 1e-9;

/// Per-agent categorical distributions at one recurrence step.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsState {
    pub distributions: [Vec<f64>; 2],
    pub step: usize,
}

impl DynamicsState {
    pub fn uniform(n_actions: usize) -> Self {
        DynamicsState {
            distributions: [
                vec![1.0 / n_actions as f64; n_actions],
                vec![1.0 / n_actions as f64; n_actions],
            ],
            step: 0,
        }
    }

    /// Greedy joint action (argmax per agent, ties to the lowest index).
    pub fn greedy_joint(&self) -> (usize, usize) {
        let arg = |d: &[f64]| {
            let mut best = 0;
            for (i, p) in d.iter().enumerate() {
                if *p > d[best] {
                    best = i;
                }
            }
            best
        };
        (arg(&self.distributions[0]), arg(&self.distributions[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    /// Softmax temperature of the recurrence (the update rule divides the
    /// scores by this before the softmax).
    pub temperature: f64,
    pub steps: usize,
    pub optimistic: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            temperature: 2.0,
            steps: 10,
            optimistic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    NonSimplex(String),
    NonPositiveTemperature(f64),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::NonSimplex(msg) => write!(f, "marginal is not on the simplex: {msg}"),
            DynamicsError::NonPositiveTemperature(t) => {
                write!(f, "temperature must be positive, got {t}")
            }
        }
    }
}

impl std::error::Error for DynamicsError {}

fn check_simplex(p: &[f64]) -> Result<(), DynamicsError> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(DynamicsError::NonSimplex("negative or non-finite entry".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(DynamicsError::NonSimplex(format!("sums to {sum}")));
    }
    Ok(())
}

fn transpose(payoff: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[j][i] = payoff[i][j];
        }
    }
    t
}

/// Expected payoff of each row under the other agent's marginal:
/// `Q_i = sum_j pi_other(j) * R(i, j)`.
pub fn expected_q(payoff: &[[f64; 3]; 3], other_marginal: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_simplex(other_marginal)?;
    Ok(payoff
        .iter()
        .map(|row| row.iter().zip(other_marginal.iter()).map(|(r, p)| r * p).sum())
        .collect())
}

/// Optimistic action values: the best joint payoff each row enables, as an
/// advantage over the current joint value, clipped at zero:
/// `Q_i = V + max(max_j R(i,j) - V, 0)` with `V = pi_own^T R pi_other`.
pub fn optimistic_expected_q(
    payoff: &[[f64; 3]; 3],
    own_marginal: &[f64],
    other_marginal: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    check_simplex(own_marginal)?;
    check_simplex(other_marginal)?;
    let mut v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            v += own_marginal[i] * other_marginal[j] * payoff[i][j];
        }
    }
    Ok(payoff
        .iter()
        .map(|row| {
            let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v + (best - v).max(0.0)
        })
        .collect())
}

fn softmax(q: &[f64], temperature: f64) -> Vec<f64> {
    let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q.iter().map(|x| ((x - max) / temperature).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// One simultaneous update of both agents from the time-t state.
pub fn softmax_step(
    state: &DynamicsState,
    payoff: &[[f64; 3]; 3],
    cfg: &DynamicsConfig,
) -> Result<DynamicsState, DynamicsError> {
    if cfg.temperature <= 0.0 || !cfg.temperature.is_finite() {
        return Err(DynamicsError::NonPositiveTemperature(cfg.temperature));
    }
    let tposed = transpose(payoff);
    let [own0, own1] = &state.distributions;
    let q0 = if cfg.optimistic {
        optimistic_expected_q(payoff, own0, own1)?
    } else {
        expected_q(payoff, own1)?
    };
    let q1 = if cfg.optimistic {
        optimistic_expected_q(&tposed, own1, own0)?
    } else {
        expected_q(&tposed, own0)?
    };
    Ok(DynamicsState {
        distributions: [softmax(&q0, cfg.temperature), softmax(&q1, cfg.temperature)],
        step: state.step + 1,
    })
}

/// Iterates the recurrence from the uniform start, recording every state
/// (the initial state included, so the result has `steps + 1` entries).
pub fn run_dynamics(
    payoff: &[[f64; 3]; 3],
    cfg: &DynamicsConfig,
) -> Result<Vec<DynamicsState>, DynamicsError> {
    let mut states = Vec::with_capacity(cfg.steps + 1);
    let mut cur = DynamicsState::uniform(3);
    states.push(cur.clone());
    for _ in 0..cfg.steps {
        cur = softmax_step(&cur, payoff, cfg)?;
        states.push(cur.clone());
    }
    Ok(states)
}

/// Trajectory dump for plotting: `step,agent,action,probability` rows.
pub fn trajectory_csv(states: &[DynamicsState]) -> String {
    let mut out = String::from("step,agent,action,probability\n");
    for s in states {
        for (agent, dist) in s.distributions.iter().enumerate() {
            for (action, p) in dist.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", s.step, agent, action, p));
            }
        }
    }
    out
}
