//! Penalized push-box gridworld.
//!
//! Two agents share a grid with one box. The box advances one row toward
//! `goal_row` only when both agents push it on the same step while standing
//! on pushable cells (beside or behind it). A push by exactly one agent
//! costs `uncoordinated_push_penalty`; reaching the goal row pays
//! `success_reward` once and ends the episode. A policy that never pushes
//! earns exactly zero.
//!
//! Observation: three row-major one-hot planes (agent 0, agent 1, box).

use std::collections::HashMap;

use super::{expect_discrete, Action, ActionSpace, EnvError, Transition};

pub const PUSHBOX_ACTIONS: usize = 5; // up, down, left, right, push

#[derive(Debug, Clone, PartialEq)]
pub struct PushBoxConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub episode_length: usize,
    pub success_reward: f64,
    pub uncoordinated_push_penalty: f64,
    pub goal_row: usize,
    pub box_start: (usize, usize),
    pub agent_starts: [(usize, usize); 2],
}

impl Default for PushBoxConfig {
    fn default() -> Self {
        PushBoxConfig {
            grid_width: 5,
            grid_height: 5,
            episode_length: 20,
            success_reward: 1.6,
            uncoordinated_push_penalty: -0.5,
            goal_row: 0,
            box_start: (1, 2),
            agent_starts: [(1, 1), (1, 3)],
        }
    }
}

impl PushBoxConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(EnvError::InvalidSpec("grid dimensions must be positive".into()));
        }
        if self.episode_length == 0 {
            return Err(EnvError::InvalidSpec("episode_length must be >= 1".into()));
        }
        if !self.success_reward.is_finite() || !self.uncoordinated_push_penalty.is_finite() {
            return Err(EnvError::InvalidSpec("rewards must be finite".into()));
        }
        if self.uncoordinated_push_penalty >= 0.0 {
            return Err(EnvError::InvalidSpec(
                "uncoordinated_push_penalty must be negative".into(),
            ));
        }
        if self.goal_row >= self.grid_height {
            return Err(EnvError::InvalidSpec("goal_row outside the grid".into()));
        }
        let inside = |p: (usize, usize)| p.0 < self.grid_height && p.1 < self.grid_width;
        if !inside(self.box_start) || !self.agent_starts.iter().all(|&p| inside(p)) {
            return Err(EnvError::InvalidSpec("start positions outside the grid".into()));
        }
        if self.box_start.0 == self.goal_row {
            return Err(EnvError::InvalidSpec("box must not start on the goal row".into()));
        }
        if self.agent_starts.iter().any(|&p| p == self.box_start) {
            return Err(EnvError::InvalidSpec("agents must not start on the box".into()));
        }
        Ok(())
    }

    fn push_dir(&self, box_row: usize) -> isize {
        if self.goal_row < box_row {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone)]
pub struct PushBox {
    pub cfg: PushBoxConfig,
    agents: [(usize, usize); 2],
    box_pos: (usize, usize),
    step_idx: usize,
    done: bool,
}

impl PushBox {
    pub fn new(cfg: PushBoxConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let agents = cfg.agent_starts;
        let box_pos = cfg.box_start;
        Ok(PushBox {
            cfg,
            agents,
            box_pos,
            step_idx: 0,
            done: false,
        })
    }

    pub fn obs_dim(&self) -> usize {
        3 * self.cfg.grid_width * self.cfg.grid_height
    }

    pub fn action_spaces(&self) -> Vec<ActionSpace> {
        vec![ActionSpace::Discrete(PUSHBOX_ACTIONS); 2]
    }

    pub fn box_row(&self) -> usize {
        self.box_pos.0
    }

    fn obs(&self) -> Vec<f64> {
        let cells = self.cfg.grid_width * self.cfg.grid_height;
        let mut o = vec![0.0; 3 * cells];
        let at = |p: (usize, usize)| p.0 * self.cfg.grid_width + p.1;
        o[at(self.agents[0])] = 1.0;
        o[cells + at(self.agents[1])] = 1.0;
        o[2 * cells + at(self.box_pos)] = 1.0;
        o
    }

    pub fn reset(&mut self) -> Vec<f64> {
        self.agents = self.cfg.agent_starts;
        self.box_pos = self.cfg.box_start;
        self.step_idx = 0;
        self.done = false;
        self.obs()
    }

    /// A cell from which an agent's push moves the box: any 4-neighbor of
    /// the box except the cell the box is about to move into.
    fn pushable_from(&self, pos: (usize, usize)) -> bool {
        let (br, bc) = (self.box_pos.0 as isize, self.box_pos.1 as isize);
        let (r, c) = (pos.0 as isize, pos.1 as isize);
        let adjacent = (r - br).abs() + (c - bc).abs() == 1;
        let front = (br + self.cfg.push_dir(self.box_pos.0), bc);
        adjacent && (r, c) != front
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
        let state = self.obs();
        let a0 = expect_discrete(joint, 0, PUSHBOX_ACTIONS)?;
        let a1 = expect_discrete(joint, 1, PUSHBOX_ACTIONS)?;
        let acts = [a0, a1];

        let effective = [
            acts[0] == 4 && self.pushable_from(self.agents[0]),
            acts[1] == 4 && self.pushable_from(self.agents[1]),
        ];

        // movement first; the box blocks
        for (i, &a) in acts.iter().enumerate() {
            if a < 4 {
                let (dr, dc) = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)][a];
                let nr = (self.agents[i].0 as isize + dr)
                    .clamp(0, self.cfg.grid_height as isize - 1) as usize;
                let nc = (self.agents[i].1 as isize + dc)
                    .clamp(0, self.cfg.grid_width as isize - 1) as usize;
                if (nr, nc) != self.box_pos {
                    self.agents[i] = (nr, nc);
                }
            }
        }

        let mut reward = 0.0;
        let mut done = false;
        if effective[0] && effective[1] {
            let dir = self.cfg.push_dir(self.box_pos.0);
            self.box_pos.0 = (self.box_pos.0 as isize + dir) as usize;
            for i in 0..2 {
                let nr = (self.agents[i].0 as isize + dir)
                    .clamp(0, self.cfg.grid_height as isize - 1) as usize;
                self.agents[i].0 = nr;
            }
            if self.box_pos.0 == self.cfg.goal_row {
                reward = self.cfg.success_reward;
                done = true;
            }
        } else if effective[0] != effective[1] {
            reward = self.cfg.uncoordinated_push_penalty;
        }

        self.step_idx += 1;
        if self.step_idx >= self.cfg.episode_length {
            done = true;
        }
        self.done = done;
        Ok(Transition {
            state,
            joint_action: joint.to_vec(),
            reward,
            next_state: self.obs(),
            done,
        })
    }
}

/// Exact maximum episode return, by dynamic programming over the joint
/// state (both agents, box, step). The dynamics are deterministic, so this
/// equals exhaustive search over open-loop joint plans up to the horizon.
pub fn exhaustive_optimal_return(cfg: &PushBoxConfig) -> Result<f64, EnvError> {
    cfg.validate()?;
    let template = PushBox::new(cfg.clone())?;
    let mut memo: HashMap<([(usize, usize); 2], (usize, usize), usize), f64> = HashMap::new();

    fn best(
        env: &PushBox,
        memo: &mut HashMap<([(usize, usize); 2], (usize, usize), usize), f64>,
    ) -> f64 {
        let key = (env.agents, env.box_pos, env.step_idx);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut out = f64::NEG_INFINITY;
        for a0 in 0..PUSHBOX_ACTIONS {
            for a1 in 0..PUSHBOX_ACTIONS {
                let mut next = env.clone();
                let t = next
                    .step(&[Action::Discrete(a0), Action::Discrete(a1)])
                    .expect("in-range actions");
                let v = if t.done { t.reward } else { t.reward + best(&next, memo) };
                out = out.max(v);
            }
        }
        memo.insert(key, out);
        out
    }

    let mut env = template;
    env.reset();
    Ok(best(&env, &mut memo))
}
