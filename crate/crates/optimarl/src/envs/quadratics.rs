//! Continuous two-peak coordination game.
//!
//! Each agent picks one scalar action; the pair forms a 2-D point scored by
//! the higher of two radial Gaussian peaks. The narrow peak dominates in
//! value, the broad one in basin size, so gradient followers that punish
//! misses drift to the broad peak while optimistic updates can lock onto
//! the narrow one.

use super::{Action, ActionSpace, EnvError, Transition};

pub const QUADRATICS_OBS_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticsConfig {
    pub centers: [[f64; 2]; 2],
    pub peak_values: [f64; 2],
    pub widths: [f64; 2],
    pub action_bound: f64,
    pub episode_length: usize,
}

impl Default for QuadraticsConfig {
    fn default() -> Self {
        QuadraticsConfig {
            centers: [[5.0, 5.0], [-5.0, -5.0]],
            peak_values: [1.0, 0.5],
            widths: [2.5, 10.0],
            action_bound: 10.0,
            episode_length: 25,
        }
    }
}

impl QuadraticsConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let finite = self
            .centers
            .iter()
            .flatten()
            .chain(self.peak_values.iter())
            .chain(self.widths.iter())
            .all(|x| x.is_finite());
        if !finite || !self.action_bound.is_finite() {
            return Err(EnvError::InvalidSpec("quadratics parameters must be finite".into()));
        }
        if self.action_bound <= 0.0 {
            return Err(EnvError::InvalidSpec("action_bound must be positive".into()));
        }
        if self.episode_length == 0 {
            return Err(EnvError::InvalidSpec("episode_length must be >= 1".into()));
        }
        if self.peak_values[0] <= 0.0 || self.peak_values[1] <= 0.0 {
            return Err(EnvError::InvalidSpec("peak values must be positive".into()));
        }
        if self.widths[0] <= 0.0 || self.widths[1] <= 0.0 {
            return Err(EnvError::InvalidSpec("widths must be positive".into()));
        }
        if self.peak_values[0] == self.peak_values[1] {
            return Err(EnvError::InvalidSpec(
                "one peak must strictly exceed the other".into(),
            ));
        }
        let (hi, lo) = if self.peak_values[0] > self.peak_values[1] { (0, 1) } else { (1, 0) };
        if self.widths[hi] >= self.widths[lo] {
            return Err(EnvError::InvalidSpec(
                "the higher peak must be narrower than the lower peak".into(),
            ));
        }
        Ok(())
    }

    /// Index of the global (higher, narrower) peak.
    pub fn global_peak(&self) -> usize {
        if self.peak_values[0] > self.peak_values[1] {
            0
        } else {
            1
        }
    }

    pub fn reward_at(&self, point: [f64; 2]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for k in 0..2 {
            let dx = point[0] - self.centers[k][0];
            let dy = point[1] - self.centers[k][1];
            let v = self.peak_values[k] * (-(dx * dx + dy * dy) / (2.0 * self.widths[k] * self.widths[k])).exp();
            best = best.max(v);
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct Quadratics {
    pub cfg: QuadraticsConfig,
    step_idx: usize,
    done: bool,
}

impl Quadratics {
    pub fn new(cfg: QuadraticsConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        Ok(Quadratics {
            cfg,
            step_idx: 0,
            done: false,
        })
    }

    pub fn obs_dim(&self) -> usize {
        QUADRATICS_OBS_DIM
    }

    pub fn action_spaces(&self) -> Vec<ActionSpace> {
        vec![
            ActionSpace::Continuous {
                dim: 1,
                bound: self.cfg.action_bound,
            };
            2
        ]
    }

    fn obs(&self) -> Vec<f64> {
        vec![1.0; QUADRATICS_OBS_DIM]
    }

    pub fn reset(&mut self) -> Vec<f64> {
        self.step_idx = 0;
        self.done = false;
        self.obs()
    }

    fn scalar_action(&self, joint: &[Action], agent: usize) -> Result<f64, EnvError> {
        match &joint[agent] {
            Action::Continuous(v) if v.len() == 1 => {
                let a = v[0];
                if !a.is_finite() {
                    return Err(EnvError::ActionOutOfRange {
                        agent,
                        detail: "non-finite action".into(),
                    });
                }
                if a.abs() > self.cfg.action_bound + 1e-9 {
                    return Err(EnvError::ActionOutOfRange {
                        agent,
                        detail: format!("|{a}| exceeds bound {}", self.cfg.action_bound),
                    });
                }
                Ok(a)
            }
            Action::Continuous(v) => Err(EnvError::ActionOutOfRange {
                agent,
                detail: format!("expected 1-dimensional action, got {}", v.len()),
            }),
            Action::Discrete(_) => Err(EnvError::ActionOutOfRange {
                agent,
                detail: "expected a continuous action".into(),
            }),
        }
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
        let x = self.scalar_action(joint, 0)?;
        let y = self.scalar_action(joint, 1)?;
        let reward = self.cfg.reward_at([x, y]);
        let done = self.step_idx == self.cfg.episode_length - 1;
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_is_peak_value_at_centers() {
        let cfg = QuadraticsConfig::default();
        assert_eq!(cfg.reward_at([5.0, 5.0]), 1.0);
        assert_eq!(cfg.reward_at([-5.0, -5.0]), 0.5);
    }

    #[test]
    fn reward_takes_the_max_of_both_peaks() {
        let cfg = QuadraticsConfig::default();
        // far from the narrow peak the broad one dominates
        let r = cfg.reward_at([0.0, 0.0]);
        let broad = 0.5 * (-50.0f64 / (2.0 * 100.0)).exp();
        assert!((r - broad).abs() < 1e-12);
    }

    #[test]
    fn constant_observation() {
        let mut env = Quadratics::new(QuadraticsConfig::default()).unwrap();
        assert_eq!(env.reset(), vec![1.0; QUADRATICS_OBS_DIM]);
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = QuadraticsConfig::default();
        cfg.peak_values = [0.5, 0.5];
        assert!(Quadratics::new(cfg).is_err());
        let mut cfg = QuadraticsConfig::default();
        cfg.widths = [10.0, 2.5]; // global wider than local
        assert!(Quadratics::new(cfg).is_err());
        let mut cfg = QuadraticsConfig::default();
        cfg.action_bound = -1.0;
        assert!(Quadratics::new(cfg).is_err());
    }

    #[test]
    fn out_of_bound_or_wrong_arity_action_errors() {
        let mut env = Quadratics::new(QuadraticsConfig::default()).unwrap();
        env.reset();
        let too_big = [
            Action::Continuous(vec![11.0]),
            Action::Continuous(vec![0.0]),
        ];
        assert!(env.step(&too_big).is_err());
        let wrong_dim = [
            Action::Continuous(vec![1.0, 2.0]),
            Action::Continuous(vec![0.0]),
        ];
        assert!(env.step(&wrong_dim).is_err());
    }
}
