//! Tabular hysteretic Q-learning baseline for matrix games: independent
//! learners with an asymmetric learning rate (value-decreasing updates get
//! `alpha_pos * alpha_neg_ratio`; ratio 1 recovers standard Q-learning).

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::envs::{Action, ActionSpace, Env};

#[derive(Debug, Clone, PartialEq)]
pub struct HystQConfig {
    pub alpha_pos: f64,
    /// Multiplier in (0, 1] for negative TD updates; 1 = plain Q-learning.
    pub alpha_neg_ratio: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_episodes: usize,
    pub episodes: usize,
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for HystQConfig {
    fn default() -> Self {
        HystQConfig {
            alpha_pos: 0.1,
            alpha_neg_ratio: 0.01,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 8000,
            episodes: 10_000,
            eval_every: 500,
            seed: 0,
        }
    }
}

impl HystQConfig {
    pub fn validate(&self) -> Result<(), HystError> {
        if !(0.0 < self.alpha_pos && self.alpha_pos <= 1.0) {
            return Err(HystError::BadConfig(format!("alpha_pos {} not in (0,1]", self.alpha_pos)));
        }
        if !(0.0 < self.alpha_neg_ratio && self.alpha_neg_ratio <= 1.0) {
            return Err(HystError::BadConfig(format!(
                "alpha_neg_ratio {} not in (0,1]",
                self.alpha_neg_ratio
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(HystError::BadConfig(format!("gamma {} not in [0,1)", self.gamma)));
        }
        if self.episodes == 0 {
            return Err(HystError::BadConfig("episodes must be >= 1".into()));
        }
        Ok(())
    }

    /// Linearly decayed exploration rate for the given episode index.
    pub fn epsilon_at(&self, episode: usize) -> f64 {
        if self.epsilon_decay_episodes == 0 || episode >= self.epsilon_decay_episodes {
            return self.epsilon_end;
        }
        let frac = episode as f64 / self.epsilon_decay_episodes as f64;
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HystError {
    BadConfig(String),
    IndexOutOfRange { state: usize, action: usize },
    ContinuousEnv,
}

impl fmt::Display for HystError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HystError::BadConfig(msg) => write!(f, "bad hysteretic config: {msg}"),
            HystError::IndexOutOfRange { state, action } => {
                write!(f, "Q index out of range: state {state}, action {action}")
            }
            HystError::ContinuousEnv => {
                write!(f, "hysteretic Q-learning needs discrete states and actions")
            }
        }
    }
}

impl std::error::Error for HystError {}

/// One agent's `(state, action) -> value` table.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub values: Vec<f64>,
    pub n_states: usize,
    pub n_actions: usize,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        QTable {
            values: vec![0.0; n_states * n_actions],
            n_states,
            n_actions,
        }
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    fn get_mut(&mut self, state: usize, action: usize) -> &mut f64 {
        &mut self.values[state * self.n_actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn max_over_actions(&self, state: usize) -> f64 {
        self.row(state).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax with ties broken toward the lowest index.
    pub fn greedy(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (i, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean_value(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Plain text grid: one row per state, actions across.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in 0..self.n_states {
            let row: Vec<String> = self.row(s).iter().map(|v| format!("{v:12.4}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// One transition as seen by a single independent learner.
#[derive(Debug, Clone, Copy)]
pub struct TabularTransition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub done: bool,
}

/// The asymmetric update: positive TD uses `alpha_pos`, negative TD uses
/// `alpha_pos * alpha_neg_ratio`.
pub fn hq_update(q: &mut QTable, t: &TabularTransition, cfg: &HystQConfig) -> Result<(), HystError> {
    if t.state >= q.n_states || t.action >= q.n_actions || t.next_state >= q.n_states {
        return Err(HystError::IndexOutOfRange { state: t.state, action: t.action });
    }
    let bootstrap = if t.done { 0.0 } else { q.max_over_actions(t.next_state) };
    let td = t.reward + cfg.gamma * bootstrap - q.get(t.state, t.action);
    let alpha = if td >= 0.0 {
        cfg.alpha_pos
    } else {
        cfg.alpha_pos * cfg.alpha_neg_ratio
    };
    *q.get_mut(t.state, t.action) += alpha * td;
    Ok(())
}

/// Epsilon-greedy action selection over one table row.
pub fn eps_greedy<R: Rng>(q: &QTable, state: usize, epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.n_actions)
    } else {
        q.greedy(state)
    }
}

/// One point on the learning curve.
#[derive(Debug, Clone, Copy)]
pub struct HystCurvePoint {
    pub episode: usize,
    pub env_steps: usize,
    pub greedy_return: f64,
    pub mean_q: [f64; 2],
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct HystResult {
    pub tables: [QTable; 2],
    pub curve: Vec<HystCurvePoint>,
}

fn discrete_action_count(env: &Env) -> Result<usize, HystError> {
    match env.action_spaces()[0] {
        ActionSpace::Discrete(n) => Ok(n),
        ActionSpace::Continuous { .. } => Err(HystError::ContinuousEnv),
    }
}

/// Greedy-policy episode return of the current tables.
pub fn greedy_return(env: &mut Env, tables: &[QTable; 2]) -> f64 {
    env.reset();
    let mut total = 0.0;
    loop {
        let joint = [
            Action::Discrete(tables[0].greedy(0)),
            Action::Discrete(tables[1].greedy(0)),
        ];
        let t = env.step(&joint).expect("greedy actions are in range");
        total += t.reward;
        if t.done {
            break;
        }
    }
    total
}

/// Independent epsilon-greedy training with hysteretic updates. Matrix
/// games use a single aggregated state (the observation is constant), so
/// each table has one row.
pub fn hq_train(env: &mut Env, cfg: &HystQConfig) -> Result<HystResult, HystError> {
    cfg.validate()?;
    let n_actions = discrete_action_count(env)?;
    let mut tables = [QTable::zeros(1, n_actions), QTable::zeros(1, n_actions)];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut curve = Vec::new();
    let mut env_steps = 0usize;

    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon_at(episode);
        env.reset();
        loop {
            let a0 = eps_greedy(&tables[0], 0, eps, &mut rng);
            let a1 = eps_greedy(&tables[1], 0, eps, &mut rng);
            let t = env
                .step(&[Action::Discrete(a0), Action::Discrete(a1)])
                .expect("sampled actions are in range");
            env_steps += 1;
            for (table, action) in tables.iter_mut().zip([a0, a1]) {
                hq_update(
                    table,
                    &TabularTransition {
                        state: 0,
                        action,
                        reward: t.reward,
                        next_state: 0,
                        done: t.done,
                    },
                    cfg,
                )?;
            }
            if t.done {
                break;
            }
        }
        if cfg.eval_every > 0 && (episode % cfg.eval_every == 0 || episode + 1 == cfg.episodes) {
            curve.push(HystCurvePoint {
                episode,
                env_steps,
                greedy_return: greedy_return(env, &tables),
                mean_q: [tables[0].mean_value(), tables[1].mean_value()],
                epsilon: eps,
            });
        }
    }
    Ok(HystResult { tables, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_env, EnvSpec, MatrixGameSpec, QuadraticsConfig};

    fn cfg() -> HystQConfig {
        HystQConfig::default()
    }

    #[test]
    fn positive_td_uses_full_rate() {
        // Q=1, r=2, gamma=0.9, max Q(s')=1, alpha=0.1 -> TD=1.9 -> Q=1.19
        let mut q = QTable::zeros(1, 2);
        q.values = vec![1.0, 1.0];
        let c = HystQConfig { alpha_pos: 0.1, gamma: 0.9, ..cfg() };
        hq_update(
            &mut q,
            &TabularTransition { state: 0, action: 0, reward: 2.0, next_state: 0, done: false },
            &c,
        )
        .unwrap();
        assert!((q.get(0, 0) - 1.19).abs() < 1e-12);
    }

    #[test]
    fn negative_td_uses_scaled_rate() {
        // Q=1, target 0.5 (TD=-0.5), alpha=0.1, ratio=0.1 -> Q = 0.995
        let mut q = QTable::zeros(1, 1);
        q.values = vec![1.0];
        let c = HystQConfig { alpha_pos: 0.1, alpha_neg_ratio: 0.1, gamma: 0.9, ..cfg() };
        // done transition with reward 0.5 gives target 0.5
        hq_update(
            &mut q,
            &TabularTransition { state: 0, action: 0, reward: 0.5, next_state: 0, done: true },
            &c,
        )
        .unwrap();
        assert!((q.get(0, 0) - 0.995).abs() < 1e-12);
    }

    #[test]
    fn ratio_one_is_plain_q_learning() {
        let c_h = HystQConfig { alpha_neg_ratio: 1.0, ..cfg() };
        for (reward, done) in [(2.0, false), (-3.0, true), (0.0, false)] {
            let mut q = QTable::zeros(1, 2);
            q.values = vec![0.7, -0.4];
            let mut q_plain = q.clone();
            let t = TabularTransition { state: 0, action: 0, reward, next_state: 0, done };
            hq_update(&mut q, &t, &c_h).unwrap();
            // plain Q-learning reference update
            let bootstrap = if done { 0.0 } else { q_plain.max_over_actions(0) };
            let td = reward + c_h.gamma * bootstrap - q_plain.get(0, 0);
            q_plain.values[0] += c_h.alpha_pos * td;
            assert_eq!(q.values, q_plain.values);
        }
    }

    #[test]
    fn index_out_of_range_rejected() {
        let mut q = QTable::zeros(1, 3);
        let t = TabularTransition { state: 0, action: 3, reward: 0.0, next_state: 0, done: true };
        assert!(hq_update(&mut q, &t, &cfg()).is_err());
    }

    #[test]
    fn eps_greedy_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut q = QTable::zeros(1, 3);
        q.values = vec![0.0, 5.0, 5.0];
        // epsilon 0: argmax with lowest-index tie break
        for _ in 0..50 {
            assert_eq!(eps_greedy(&q, 0, 0.0, &mut rng), 1);
        }
        // epsilon 1: empirically uniform
        let n = 30_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[eps_greedy(&q, 0, 1.0, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn epsilon_schedule_is_linear_then_flat() {
        let c = HystQConfig {
            epsilon_start: 1.0,
            epsilon_end: 0.0,
            epsilon_decay_episodes: 100,
            ..cfg()
        };
        assert_eq!(c.epsilon_at(0), 1.0);
        assert!((c.epsilon_at(50) - 0.5).abs() < 1e-12);
        assert_eq!(c.epsilon_at(100), 0.0);
        assert_eq!(c.epsilon_at(10_000), 0.0);
    }

    #[test]
    fn rejects_continuous_envs() {
        let mut env = make_env(&EnvSpec::Quadratics(QuadraticsConfig::default())).unwrap();
        assert!(matches!(hq_train(&mut env, &cfg()), Err(HystError::ContinuousEnv)));
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let spec = EnvSpec::Matrix(MatrixGameSpec::climbing());
        let run = || {
            let mut env = make_env(&spec).unwrap();
            let c = HystQConfig { episodes: 300, eval_every: 100, ..cfg() };
            hq_train(&mut env, &c).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.tables[0].values, b.tables[0].values);
        assert_eq!(a.tables[1].values, b.tables[1].values);
    }

    #[test]
    fn q_values_stay_within_achievable_bounds() {
        let spec = EnvSpec::Matrix(MatrixGameSpec::climbing());
        let mut env = make_env(&spec).unwrap();
        let c = HystQConfig { episodes: 2000, ..cfg() };
        let result = hq_train(&mut env, &c).unwrap();
        let lo = -30.0 / (1.0 - c.gamma);
        let hi = 11.0 / (1.0 - c.gamma);
        for t in &result.tables {
            for v in &t.values {
                assert!(*v >= lo && *v <= hi, "Q value {v} outside [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn optimistic_learner_finds_the_climbing_optimum() {
        let spec = EnvSpec::Matrix(MatrixGameSpec::climbing());
        let mut env = make_env(&spec).unwrap();
        let c = HystQConfig { alpha_neg_ratio: 0.01, seed: 1, ..cfg() };
        let result = hq_train(&mut env, &c).unwrap();
        assert_eq!(result.tables[0].greedy(0), 0);
        assert_eq!(result.tables[1].greedy(0), 0);
        assert_eq!(greedy_return(&mut env, &result.tables), 275.0);
    }

    #[test]
    fn optimistic_learner_solves_penalty_game() {
        let spec = EnvSpec::Matrix(MatrixGameSpec::penalty(-100.0));
        let mut env = make_env(&spec).unwrap();
        let c = HystQConfig { alpha_neg_ratio: 0.01, seed: 1, ..cfg() };
        let result = hq_train(&mut env, &c).unwrap();
        assert_eq!(greedy_return(&mut env, &result.tables), 250.0);
    }
}
