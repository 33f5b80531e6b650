//! Repeated 3x3 cooperative matrix games with constant observation.

use super::{expect_discrete, Action, ActionSpace, EnvError, Transition};

/// Observation is the all-ones vector of this dimension; a nonzero constant
/// input keeps MLP gradients alive.
pub const MATRIX_OBS_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSpec {
    /// Common reward per joint action, `payoff[row][col]`.
    pub payoff: [[f64; 3]; 3],
    pub episode_length: usize,
    pub name: String,
}

impl MatrixGameSpec {
    /// The climbing game: global optimum 11 at (0,0), a (7) trap at (1,1),
    /// and -30 pitfalls guarding the optimum.
    pub fn climbing() -> Self {
        MatrixGameSpec {
            payoff: [[11.0, -30.0, 0.0], [-30.0, 7.0, 6.0], [0.0, 0.0, 5.0]],
            episode_length: 25,
            name: "climbing".into(),
        }
    }

    /// The penalty game: two global optima worth 10 at (0,2)/(2,0), a safe
    /// (2) cell at (1,1), and penalty `k <= 0` on the diagonal corners.
    pub fn penalty(k: f64) -> Self {
        MatrixGameSpec {
            payoff: [[k, 0.0, 10.0], [0.0, 2.0, 0.0], [10.0, 0.0, k]],
            episode_length: 25,
            name: format!("penalty_k{k}"),
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.payoff.iter().flatten().any(|x| !x.is_finite()) {
            return Err(EnvError::InvalidSpec("matrix payoff must be finite".into()));
        }
        if self.episode_length == 0 {
            return Err(EnvError::InvalidSpec("episode_length must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MatrixGame {
    pub spec: MatrixGameSpec,
    step_idx: usize,
    done: bool,
}

impl MatrixGame {
    pub fn new(spec: MatrixGameSpec) -> Result<Self, EnvError> {
        spec.validate()?;
        Ok(MatrixGame {
            spec,
            step_idx: 0,
            done: false,
        })
    }

    pub fn obs_dim(&self) -> usize {
        MATRIX_OBS_DIM
    }

    pub fn action_spaces(&self) -> Vec<ActionSpace> {
        vec![ActionSpace::Discrete(3); 2]
    }

    fn obs(&self) -> Vec<f64> {
        vec![1.0; MATRIX_OBS_DIM]
    }

    pub fn reset(&mut self) -> Vec<f64> {
        self.step_idx = 0;
        self.done = false;
        self.obs()
    }

    pub fn step(&mut self, joint: &[Action]) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::SteppedAfterDone);
        }
        if joint.len() != 2 {
            return Err(EnvError::WrongJointActionArity {
                expected: 2,
                got: joint.len(),
            });
        }
        let row = expect_discrete(joint, 0, 3)?;
        let col = expect_discrete(joint, 1, 3)?;
        let reward = self.spec.payoff[row][col];
        let done = self.step_idx == self.spec.episode_length - 1;
        self.step_idx += 1;
        self.done = done;
        Ok(Transition {
            state: self.obs(),
            joint_action: joint.to_vec(),
            reward,
            next_state: self.obs(),
            done,
        })
    }
}
