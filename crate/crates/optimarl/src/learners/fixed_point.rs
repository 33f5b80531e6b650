//! Exact enumeration check of the optimality fixed point: at an optimal
//! policy every advantage is nonpositive, so clip-at-zero shaping zeroes
//! every term of the policy gradient and the gradient norm is exactly 0.

use std::fmt;

/// A small tabular MDP. `transition[s][a][s']` are probabilities,
/// `reward[s][a]` immediate rewards. Terminal states are absorbing with
/// zero reward and contribute no gradient terms.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
    pub terminal: Vec<bool>,
    pub gamma: f64,
    pub initial_dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointError {
    TooLarge { pairs: usize, limit: usize },
    BadMdp(String),
    BadPolicy(String),
}

impl fmt::Display for FixedPointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixedPointError::TooLarge { pairs, limit } => {
                write!(f, "MDP has {pairs} state-action pairs, exact enumeration limit is {limit}")
            }
            FixedPointError::BadMdp(msg) => write!(f, "bad MDP: {msg}"),
            FixedPointError::BadPolicy(msg) => write!(f, "bad policy: {msg}"),
        }
    }
}

impl std::error::Error for FixedPointError {}

const PAIR_LIMIT: usize = 10_000;

impl TabularMdp {
    pub fn validate(&self) -> Result<(), FixedPointError> {
        let pairs = self.n_states * self.n_actions;
        if pairs > PAIR_LIMIT {
            return Err(FixedPointError::TooLarge { pairs, limit: PAIR_LIMIT });
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(FixedPointError::BadMdp(format!("gamma {} not in [0,1)", self.gamma)));
        }
        if self.transition.len() != self.n_states
            || self.reward.len() != self.n_states
            || self.terminal.len() != self.n_states
            || self.initial_dist.len() != self.n_states
        {
            return Err(FixedPointError::BadMdp("table sizes disagree with n_states".into()));
        }
        for s in 0..self.n_states {
            if self.transition[s].len() != self.n_actions || self.reward[s].len() != self.n_actions {
                return Err(FixedPointError::BadMdp(format!("state {s} action tables wrong size")));
            }
            for a in 0..self.n_actions {
                let row = &self.transition[s][a];
                if row.len() != self.n_states {
                    return Err(FixedPointError::BadMdp(format!("transition row ({s},{a}) wrong size")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| *p < 0.0) {
                    return Err(FixedPointError::BadMdp(format!(
                        "transition row ({s},{a}) is not a distribution"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-shot matrix game as an MDP over joint actions: a start state,
    /// one step with the payoff as reward, then an absorbing terminal.
    pub fn one_shot_matrix(payoff: &[[f64; 3]; 3]) -> Self {
        let n_actions = 9;
        let mut reward = vec![vec![0.0; n_actions]; 2];
        for i in 0..3 {
            for j in 0..3 {
                reward[0][i * 3 + j] = payoff[i][j];
            }
        }
        let mut transition = vec![vec![vec![0.0; 2]; n_actions]; 2];
        for a in 0..n_actions {
            transition[0][a][1] = 1.0;
            transition[1][a][1] = 1.0;
        }
        TabularMdp {
            n_states: 2,
            n_actions,
            transition,
            reward,
            terminal: vec![false, true],
            gamma: 0.9,
            initial_dist: vec![1.0, 0.0],
        }
    }

    /// A 2-state chain with a tempting early exit: the optimal policy walks
    /// to state 1 and takes the big terminal reward.
    pub fn two_state_chain() -> Self {
        // states: 0 (start), 1 (mid), 2 (terminal)
        // s0: a0 -> s1 r=0 ; a1 -> terminal r=0.1
        // s1: a0 -> terminal r=1.0 ; a1 -> terminal r=0.2
        let n_states = 3;
        let n_actions = 2;
        let mut transition = vec![vec![vec![0.0; n_states]; n_actions]; n_states];
        let mut reward = vec![vec![0.0; n_actions]; n_states];
        transition[0][0][1] = 1.0;
        transition[0][1][2] = 1.0;
        reward[0][1] = 0.1;
        transition[1][0][2] = 1.0;
        reward[1][0] = 1.0;
        transition[1][1][2] = 1.0;
        reward[1][1] = 0.2;
        transition[2][0][2] = 1.0;
        transition[2][1][2] = 1.0;
        TabularMdp {
            n_states,
            n_actions,
            transition,
            reward,
            terminal: vec![false, false, true],
            gamma: 0.9,
            initial_dist: vec![1.0, 0.0, 0.0],
        }
    }

    /// Exact greedy (optimal) policy via value iteration, deterministic
    /// with ties to the lowest action index.
    pub fn optimal_policy(&self) -> Vec<Vec<f64>> {
        let mut v = vec![0.0; self.n_states];
        for _ in 0..100_000 {
            let mut next = vec![0.0; self.n_states];
            let mut delta = 0.0f64;
            for s in 0..self.n_states {
                if self.terminal[s] {
                    continue;
                }
                let best = (0..self.n_actions)
                    .map(|a| self.q_from_v(s, a, &v))
                    .fold(f64::NEG_INFINITY, f64::max);
                next[s] = best;
                delta = delta.max((next[s] - v[s]).abs());
            }
            v = next;
            if delta < 1e-15 {
                break;
            }
        }
        (0..self.n_states)
            .map(|s| {
                let mut row = vec![0.0; self.n_actions];
                if self.terminal[s] {
                    row[0] = 1.0;
                    return row;
                }
                let mut best = 0;
                let mut best_q = f64::NEG_INFINITY;
                for a in 0..self.n_actions {
                    let q = self.q_from_v(s, a, &v);
                    if q > best_q {
                        best_q = q;
                        best = a;
                    }
                }
                row[best] = 1.0;
                row
            })
            .collect()
    }

    fn q_from_v(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        let future: f64 = self.transition[s][a]
            .iter()
            .zip(v.iter())
            .map(|(p, vv)| p * vv)
            .sum();
        self.reward[s][a] + self.gamma * future
    }

    fn check_policy(&self, policy: &[Vec<f64>]) -> Result<(), FixedPointError> {
        if policy.len() != self.n_states {
            return Err(FixedPointError::BadPolicy("wrong state count".into()));
        }
        for (s, row) in policy.iter().enumerate() {
            if row.len() != self.n_actions {
                return Err(FixedPointError::BadPolicy(format!("state {s}: wrong action count")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| *p < 0.0) {
                return Err(FixedPointError::BadPolicy(format!("state {s}: not a distribution")));
            }
        }
        Ok(())
    }
}

/// Computes the clipped-advantage policy gradient at `policy` by exact
/// enumeration and returns its L2 norm over tabular softmax parameters.
///
/// The advantage uses one extra backup `V(s) := sum_a pi(a|s) Q(s,a)`, so
/// a deterministic policy's chosen action has advantage exactly 0 and the
/// norm at an optimal policy is exactly 0, not merely small.
pub fn fixed_point_check(mdp: &TabularMdp, policy: &[Vec<f64>]) -> Result<f64, FixedPointError> {
    mdp.validate()?;
    mdp.check_policy(policy)?;

    // policy evaluation to float precision
    let mut v = vec![0.0; mdp.n_states];
    for _ in 0..200_000 {
        let mut next = vec![0.0; mdp.n_states];
        let mut delta = 0.0f64;
        for s in 0..mdp.n_states {
            if mdp.terminal[s] {
                continue;
            }
            let mut val = 0.0;
            for a in 0..mdp.n_actions {
                if policy[s][a] > 0.0 {
                    val += policy[s][a] * mdp.q_from_v(s, a, &v);
                }
            }
            next[s] = val;
            delta = delta.max((next[s] - v[s]).abs());
        }
        v = next;
        if delta == 0.0 {
            break;
        }
    }

    // Q from the converged V, then a consistent V backup and advantages
    let q: Vec<Vec<f64>> = (0..mdp.n_states)
        .map(|s| (0..mdp.n_actions).map(|a| mdp.q_from_v(s, a, &v)).collect())
        .collect();
    let v_bar: Vec<f64> = (0..mdp.n_states)
        .map(|s| {
            if mdp.terminal[s] {
                0.0
            } else {
                (0..mdp.n_actions).map(|a| policy[s][a] * q[s][a]).sum()
            }
        })
        .collect();

    // discounted occupancy from the initial distribution
    let mut occupancy = mdp.initial_dist.clone();
    let mut x = mdp.initial_dist.clone();
    for _ in 0..100_000 {
        let mut nx = vec![0.0; mdp.n_states];
        for s in 0..mdp.n_states {
            if x[s] == 0.0 || mdp.terminal[s] {
                continue;
            }
            for a in 0..mdp.n_actions {
                if policy[s][a] == 0.0 {
                    continue;
                }
                for sp in 0..mdp.n_states {
                    nx[sp] += mdp.gamma * x[s] * policy[s][a] * mdp.transition[s][a][sp];
                }
            }
        }
        let mass: f64 = nx.iter().sum();
        for s in 0..mdp.n_states {
            occupancy[s] += nx[s];
        }
        x = nx;
        if mass < 1e-16 {
            break;
        }
    }

    // gradient over tabular softmax logits:
    // g(s,b) = d(s) * sum_a pi(a|s) clip(A(s,a),0) (1{a=b} - pi(b|s))
    let mut norm_sq = 0.0;
    for s in 0..mdp.n_states {
        if mdp.terminal[s] {
            continue;
        }
        for b in 0..mdp.n_actions {
            let mut g = 0.0;
            for a in 0..mdp.n_actions {
                let adv = q[s][a] - v_bar[s];
                let clipped = adv.max(0.0);
                if clipped == 0.0 || policy[s][a] == 0.0 {
                    continue;
                }
                let indicator = if a == b { 1.0 } else { 0.0 };
                g += policy[s][a] * clipped * (indicator - policy[s][b]);
            }
            let weighted = occupancy[s] * g;
            norm_sq += weighted * weighted;
        }
    }
    Ok(norm_sq.sqrt())
}
