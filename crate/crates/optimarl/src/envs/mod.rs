//! MMDP environment contract and the three concrete environments: repeated
//! matrix games, the penalized push-box gridworld, and a continuous
//! two-peak coordination game.
//!
//! Environments are value-like: no interior RNG, no shared state. Evolution
//! is a pure function of (spec, action sequence), so replaying a logged
//! action sequence reproduces the logged rewards bit-exactly.

mod matrix;
mod pushbox;
mod quadratics;

pub use matrix::{MatrixGame, MatrixGameSpec};
pub use pushbox::{exhaustive_optimal_return, PushBox, PushBoxConfig};
pub use quadratics::{Quadratics, QuadraticsConfig};

use std::fmt;

/// A single agent's action.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

/// Per-agent action space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionSpace {
    Discrete(usize),
    /// `dim` coordinates, each clamped to `[-bound, bound]`.
    Continuous { dim: usize, bound: f64 },
}

/// One environment step. `reward` is common to all agents.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub joint_action: Vec<Action>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvError {
    UnknownKind(String),
    InvalidSpec(String),
    ActionOutOfRange { agent: usize, detail: String },
    WrongJointActionArity { expected: usize, got: usize },
    SteppedAfterDone,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::UnknownKind(k) => {
                write!(f, "unknown environment kind '{k}' (expected matrix, pushbox, or quadratics)")
            }
            EnvError::InvalidSpec(msg) => write!(f, "invalid environment spec: {msg}"),
            EnvError::ActionOutOfRange { agent, detail } => {
                write!(f, "agent {agent} action out of range: {detail}")
            }
            EnvError::WrongJointActionArity { expected, got } => {
                write!(f, "joint action has {got} entries, environment has {expected} agents")
            }
            EnvError::SteppedAfterDone => write!(f, "step called on a terminated episode"),
        }
    }
}

impl std::error::Error for EnvError {}

/// Environment construction spec, one variant per kind.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Matrix(MatrixGameSpec),
    PushBox(PushBoxConfig),
    Quadratics(QuadraticsConfig),
}

impl EnvSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            EnvSpec::Matrix(_) => "matrix",
            EnvSpec::PushBox(_) => "pushbox",
            EnvSpec::Quadratics(_) => "quadratics",
        }
    }
}

/// A constructed environment.
#[derive(Debug, Clone)]
pub enum Env {
    Matrix(MatrixGame),
    PushBox(PushBox),
    Quadratics(Quadratics),
}

/// Builds an environment after validating the spec's invariants.
pub fn make_env(spec: &EnvSpec) -> Result<Env, EnvError> {
    match spec {
        EnvSpec::Matrix(s) => Ok(Env::Matrix(MatrixGame::new(s.clone())?)),
        EnvSpec::PushBox(s) => Ok(Env::PushBox(PushBox::new(s.clone())?)),
        EnvSpec::Quadratics(s) => Ok(Env::Quadratics(Quadratics::new(s.clone())?)),
    }
}

impl Env {
    pub fn num_agents(&self) -> usize {
        2
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            Env::Matrix(e) => e.obs_dim(),
            Env::PushBox(e) => e.obs_dim(),
            Env::Quadratics(e) => e.obs_dim(),
        }
    }

    pub fn action_spaces(&self) -> Vec<ActionSpace> {
        match self {
            Env::Matrix(e) => e.action_spaces(),
            Env::PushBox(e) => e.action_spaces(),
            Env::Quadratics(e) => e.action_spaces(),
        }
    }

    pub fn episode_length(&self) -> usize {
        match self {
            Env::Matrix(e) => e.spec.episode_length,
            Env::PushBox(e) => e.cfg.episode_length,
            Env::Quadratics(e) => e.cfg.episode_length,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Env::Matrix(e) => e.spec.name.clone(),
            Env::PushBox(_) => "pushbox".into(),
            Env::Quadratics(_) => "quadratics".into(),
        }
    }

    /// The best achievable episode return, where it is known in closed form.
    pub fn optimal_return(&self) -> f64 {
        match self {
            Env::Matrix(e) => {
                let best = e
                    .spec
                    .payoff
                    .iter()
                    .flatten()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                best * e.spec.episode_length as f64
            }
            Env::PushBox(e) => e.cfg.success_reward,
            Env::Quadratics(e) => {
                let best = e.cfg.peak_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                best * e.cfg.episode_length as f64
            }
        }
    }

    pub fn reset(&mut self) -> Vec<f64> {
        match self {
            Env::Matrix(e) => e.reset(),
            Env::PushBox(e) => e.reset(),
            Env::Quadratics(e) => e.reset(),
        }
    }

    pub fn step(&mut self, joint_action: &[Action]) -> Result<Transition, EnvError> {
        match self {
            Env::Matrix(e) => e.step(joint_action),
            Env::PushBox(e) => e.step(joint_action),
            Env::Quadratics(e) => e.step(joint_action),
        }
    }
}

pub(crate) fn expect_discrete(
    joint: &[Action],
    agent: usize,
    n_actions: usize,
) -> Result<usize, EnvError> {
    match &joint[agent] {
        Action::Discrete(a) if *a < n_actions => Ok(*a),
        Action::Discrete(a) => Err(EnvError::ActionOutOfRange {
            agent,
            detail: format!("index {a} >= {n_actions}"),
        }),
        Action::Continuous(_) => Err(EnvError::ActionOutOfRange {
            agent,
            detail: "expected a discrete action".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_env_builds_each_kind() {
        let m = make_env(&EnvSpec::Matrix(MatrixGameSpec::climbing())).unwrap();
        assert_eq!(m.num_agents(), 2);
        assert_eq!(m.action_spaces(), vec![ActionSpace::Discrete(3); 2]);

        let p = make_env(&EnvSpec::PushBox(PushBoxConfig::default())).unwrap();
        assert_eq!(p.num_agents(), 2);
        assert_eq!(p.action_spaces(), vec![ActionSpace::Discrete(5); 2]);

        let q = make_env(&EnvSpec::Quadratics(QuadraticsConfig::default())).unwrap();
        assert!(matches!(
            q.action_spaces()[0],
            ActionSpace::Continuous { dim: 1, .. }
        ));
    }

    #[test]
    fn penalty_zero_max_per_step_reward_is_ten() {
        let env = make_env(&EnvSpec::Matrix(MatrixGameSpec::penalty(0.0))).unwrap();
        if let Env::Matrix(e) = &env {
            let max = e.spec.payoff.iter().flatten().cloned().fold(f64::MIN, f64::max);
            assert_eq!(max, 10.0);
        }
        assert_eq!(env.optimal_return(), 250.0);
    }

    #[test]
    fn rewards_replay_bit_exactly() {
        // random action sequences against a fresh copy reproduce rewards
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [
            EnvSpec::Matrix(MatrixGameSpec::climbing()),
            EnvSpec::PushBox(PushBoxConfig::default()),
        ] {
            let mut env = make_env(&spec).unwrap();
            env.reset();
            let mut actions = Vec::new();
            let mut rewards = Vec::new();
            let spaces = env.action_spaces();
            for _ in 0..env.episode_length() {
                let joint: Vec<Action> = spaces
                    .iter()
                    .map(|s| match s {
                        ActionSpace::Discrete(n) => Action::Discrete(rng.gen_range(0..*n)),
                        ActionSpace::Continuous { dim, bound } => Action::Continuous(
                            (0..*dim).map(|_| rng.gen_range(-bound..*bound)).collect(),
                        ),
                    })
                    .collect();
                let t = env.step(&joint).unwrap();
                actions.push(joint);
                rewards.push(t.reward);
                if t.done {
                    break;
                }
            }
            let mut replay = make_env(&spec).unwrap();
            replay.reset();
            for (joint, r) in actions.iter().zip(rewards.iter()) {
                let t = replay.step(joint).unwrap();
                assert_eq!(t.reward.to_bits(), r.to_bits());
            }
        }
    }

    proptest! {
        #[test]
        fn matrix_pure_joint_action_return_is_length_times_payoff(
            a in 0usize..3, b in 0usize..3, len in 1usize..40
        ) {
            let spec = MatrixGameSpec { episode_length: len, ..MatrixGameSpec::climbing() };
            let mut env = make_env(&EnvSpec::Matrix(spec.clone())).unwrap();
            env.reset();
            let mut total = 0.0;
            for _ in 0..len {
                let t = env.step(&[Action::Discrete(a), Action::Discrete(b)]).unwrap();
                total += t.reward;
            }
            prop_assert_eq!(total, spec.payoff[a][b] * len as f64);
        }
    }
}
