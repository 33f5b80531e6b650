//! The training loop: one policy network per agent (no parameter sharing),
//! one centralized critic over the shared full state, simultaneous updates.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::advantage::{self, AdvantageError, ScaleMode};
use crate::envs::{make_env, Action, ActionSpace, Env, EnvError, EnvSpec};
use crate::nn::{
    categorical_act, gaussian_act, gaussian_log_prob, log_softmax, mlp_from_bytes, mlp_to_bytes,
    softmax_entropy, AdamState, Grads, Mlp, NnError,
};

pub const HIDDEN_SIZES: [usize; 2] = [64, 64];
const POLICY_FINAL_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    /// Clipped-surrogate updates over several epochs and minibatches.
    OptiMappo,
    /// Single-epoch full-batch policy-gradient updates, no ratio clip.
    OptiMaa2c,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub algo: Algo,
    pub clip_eps: f64,
    /// Optimism slope: 0 clips negative advantages, 1 leaves them alone.
    pub eta: f64,
    /// Skip the shaping call entirely (reference unshaped code path).
    pub bypass_shaping: bool,
    pub policy_lr: f64,
    pub critic_lr: f64,
    pub rollout_threads: usize,
    pub steps_per_thread: usize,
    pub ppo_epochs: usize,
    pub num_minibatch: usize,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub gamma: f64,
    pub lam: f64,
    pub scale_mode: ScaleMode,
    pub init_log_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algo: Algo::OptiMappo,
            clip_eps: 0.2,
            eta: 0.0,
            bypass_shaping: false,
            policy_lr: 3e-4,
            critic_lr: 1e-3,
            rollout_threads: 8,
            steps_per_thread: 25,
            ppo_epochs: 5,
            num_minibatch: 1,
            entropy_coef: 0.01,
            max_grad_norm: 10.0,
            gamma: 0.99,
            lam: 0.0,
            scale_mode: ScaleMode::None,
            init_log_std: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.clip_eps <= 0.0 {
            return Err(TrainError::BadConfig("clip_eps must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(TrainError::BadConfig(format!("eta {} not in [0,1]", self.eta)));
        }
        if self.policy_lr <= 0.0 || self.critic_lr <= 0.0 {
            return Err(TrainError::BadConfig("learning rates must be positive".into()));
        }
        if self.rollout_threads == 0 || self.steps_per_thread == 0 {
            return Err(TrainError::BadConfig("rollout sizing must be positive".into()));
        }
        if self.ppo_epochs == 0 {
            return Err(TrainError::BadConfig("ppo_epochs must be >= 1".into()));
        }
        let batch = self.rollout_threads * self.steps_per_thread;
        if self.num_minibatch == 0 || batch % self.num_minibatch != 0 {
            return Err(TrainError::BadConfig(format!(
                "num_minibatch {} must divide the batch size {}",
                self.num_minibatch, batch
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(TrainError::BadConfig(format!("gamma {} not in [0,1)", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lam) {
            return Err(TrainError::BadConfig(format!("lam {} not in [0,1]", self.lam)));
        }
        if self.max_grad_norm <= 0.0 {
            return Err(TrainError::BadConfig("max_grad_norm must be positive".into()));
        }
        if self.entropy_coef < 0.0 {
            return Err(TrainError::BadConfig("entropy_coef must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum TrainError {
    BadConfig(String),
    Env { worker: usize, source: EnvError },
    Nn(NnError),
    Advantage(AdvantageError),
    NonFiniteRatio { agent: usize, detail: String },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::BadConfig(msg) => write!(f, "bad trainer config: {msg}"),
            TrainError::Env { worker, source } => write!(f, "worker {worker}: {source}"),
            TrainError::Nn(e) => write!(f, "{e}"),
            TrainError::Advantage(e) => write!(f, "{e}"),
            TrainError::NonFiniteRatio { agent, detail } => {
                write!(f, "non-finite importance ratio for agent {agent}: {detail}")
            }
        }
    }
}

impl std::error::Error for TrainError {}

impl From<NnError> for TrainError {
    fn from(e: NnError) -> Self {
        TrainError::Nn(e)
    }
}

impl From<AdvantageError> for TrainError {
    fn from(e: AdvantageError) -> Self {
        TrainError::Advantage(e)
    }
}

/// Per-agent action storage for one rollout.
#[derive(Debug, Clone)]
pub enum ActionBatch {
    Discrete(Vec<usize>),
    /// Raw (unclamped) samples; the environment saw the clamped copies.
    Continuous { dim: usize, data: Vec<f64> },
}

/// On-policy data for one iteration, flattened worker-major so each
/// worker's steps form one contiguous segment.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    pub states: Vec<f64>,
    pub obs_dim: usize,
    pub len: usize,
    pub actions: Vec<ActionBatch>,
    pub behavior_logps: Vec<Vec<f64>>,
    pub entropies: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    /// V(s_T) per worker segment, zero where the segment ended terminal.
    pub bootstrap: Vec<f64>,
    pub segment_len: usize,
    pub completed_returns: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub env_steps: usize,
    pub mean_return: f64,
    pub max_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: Vec<f64>,
    pub frac_adv_clipped: f64,
    pub mean_raw_adv: f64,
}

#[derive(Debug, Clone)]
enum PolicyHead {
    Categorical { n_actions: usize },
    Gaussian { dim: usize, bound: f64 },
}

#[derive(Debug, Clone)]
struct AgentNet {
    net: Mlp,
    log_std: Vec<f64>,
    head: PolicyHead,
    opt: AdamState,
}

impl AgentNet {
    fn block_lens(net: &Mlp, log_std: &[f64]) -> Vec<usize> {
        let mut lens: Vec<usize> = net
            .layers
            .iter()
            .flat_map(|l| [l.w.len(), l.b.len()])
            .collect();
        if !log_std.is_empty() {
            lens.push(log_std.len());
        }
        lens
    }
}

#[derive(Debug)]
struct Worker {
    env: Env,
    rng: ChaCha8Rng,
    obs: Vec<f64>,
    running_return: f64,
}

/// Greedy/sampling view of trained policies, decoupled from the trainer
/// (used by evaluation and by `eval` on a loaded checkpoint).
#[derive(Debug, Clone)]
pub struct PolicySnapshot {
    pub nets: Vec<(Mlp, Vec<f64>)>,
}

impl PolicySnapshot {
    pub fn act<R: Rng>(
        &self,
        agent: usize,
        obs: &[f64],
        space: &ActionSpace,
        rng: &mut R,
        greedy: bool,
    ) -> Result<Action, TrainError> {
        let (net, log_std) = &self.nets[agent];
        let (out, _) = net.forward(obs, 1)?;
        match space {
            ActionSpace::Discrete(_) => {
                let (a, _, _) = categorical_act(&out, rng, greedy)?;
                Ok(Action::Discrete(a))
            }
            ActionSpace::Continuous { bound, .. } => {
                let (raw, _) = gaussian_act(&out, log_std, rng, greedy)?;
                Ok(Action::Continuous(
                    raw.iter().map(|a| a.clamp(-bound, *bound)).collect(),
                ))
            }
        }
    }
}

pub struct Trainer {
    pub cfg: TrainConfig,
    pub env_spec: EnvSpec,
    agents: Vec<AgentNet>,
    critic: Mlp,
    critic_opt: AdamState,
    workers: Vec<Worker>,
    update_rng: ChaCha8Rng,
    pub iteration: usize,
    pub env_steps: usize,
}

impl Trainer {
    pub fn new(env_spec: EnvSpec, cfg: TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let probe = make_env(&env_spec).map_err(|source| TrainError::Env { worker: 0, source })?;
        let obs_dim = probe.obs_dim();
        let num_agents = probe.num_agents();
        let spaces = probe.action_spaces();

        let mut agents = Vec::with_capacity(num_agents);
        for (i, space) in spaces.iter().enumerate() {
            let (head, out_dim, log_std) = match space {
                ActionSpace::Discrete(n) => (PolicyHead::Categorical { n_actions: *n }, *n, vec![]),
                ActionSpace::Continuous { dim, bound } => (
                    PolicyHead::Gaussian { dim: *dim, bound: *bound },
                    *dim,
                    vec![cfg.init_log_std; *dim],
                ),
            };
            let sizes = [&[obs_dim], &HIDDEN_SIZES[..], &[out_dim]].concat();
            let net = Mlp::init_scaled(&sizes, cfg.seed.wrapping_add(1000 + i as u64), POLICY_FINAL_SCALE)?;
            let opt = AdamState::new(&AgentNet::block_lens(&net, &log_std), cfg.policy_lr);
            agents.push(AgentNet { net, log_std, head, opt });
        }

        let critic_sizes = [&[obs_dim], &HIDDEN_SIZES[..], &[1]].concat();
        let critic = Mlp::init(&critic_sizes, cfg.seed.wrapping_add(2000))?;
        let critic_opt = AdamState::new(&AgentNet::block_lens(&critic, &[]), cfg.critic_lr);

        let mut workers = Vec::with_capacity(cfg.rollout_threads);
        for w in 0..cfg.rollout_threads {
            let mut env =
                make_env(&env_spec).map_err(|source| TrainError::Env { worker: w, source })?;
            let obs = env.reset();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(w as u64 + 1);
            workers.push(Worker { env, rng, obs, running_return: 0.0 });
        }
        let mut update_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        update_rng.set_stream(0);

        Ok(Trainer {
            cfg,
            env_spec,
            agents,
            critic,
            critic_opt,
            workers,
            update_rng,
            iteration: 0,
            env_steps: 0,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn policy_snapshot(&self) -> PolicySnapshot {
        PolicySnapshot {
            nets: self
                .agents
                .iter()
                .map(|a| (a.net.clone(), a.log_std.clone()))
                .collect(),
        }
    }

    /// Runs every worker for `steps_per_thread` steps with the current
    /// policies and critic; workers keep their environments and rng streams
    /// across iterations, so the batch is deterministic given the seed and
    /// independent of scheduling.
    pub fn collect_rollout(&mut self) -> Result<RolloutBatch, TrainError> {
        let steps = self.cfg.steps_per_thread;
        let obs_dim = self.workers[0].env.obs_dim();
        let agents = &self.agents;
        let critic = &self.critic;

        struct Segment {
            states: Vec<f64>,
            actions: Vec<ActionBatch>,
            logps: Vec<Vec<f64>>,
            entropies: Vec<Vec<f64>>,
            rewards: Vec<f64>,
            values: Vec<f64>,
            dones: Vec<bool>,
            bootstrap: f64,
            completed: Vec<f64>,
        }

        let segments: Vec<Result<Segment, TrainError>> = self
            .workers
            .par_iter_mut()
            .enumerate()
            .map(|(widx, worker)| {
                let mut seg = Segment {
                    states: Vec::with_capacity(steps * obs_dim),
                    actions: agents
                        .iter()
                        .map(|a| match &a.head {
                            PolicyHead::Categorical { .. } => ActionBatch::Discrete(Vec::with_capacity(steps)),
                            PolicyHead::Gaussian { dim, .. } => ActionBatch::Continuous {
                                dim: *dim,
                                data: Vec::with_capacity(steps * dim),
                            },
                        })
                        .collect(),
                    logps: vec![Vec::with_capacity(steps); agents.len()],
                    entropies: vec![Vec::with_capacity(steps); agents.len()],
                    rewards: Vec::with_capacity(steps),
                    values: Vec::with_capacity(steps),
                    dones: Vec::with_capacity(steps),
                    bootstrap: 0.0,
                    completed: Vec::new(),
                };
                for _ in 0..steps {
                    let obs = worker.obs.clone();
                    let mut joint = Vec::with_capacity(agents.len());
                    for (ai, agent) in agents.iter().enumerate() {
                        let (out, _) = agent.net.forward(&obs, 1)?;
                        match &agent.head {
                            PolicyHead::Categorical { .. } => {
                                let (a, lp, ent) = categorical_act(&out, &mut worker.rng, false)?;
                                if let ActionBatch::Discrete(v) = &mut seg.actions[ai] {
                                    v.push(a);
                                }
                                seg.logps[ai].push(lp);
                                seg.entropies[ai].push(ent);
                                joint.push(Action::Discrete(a));
                            }
                            PolicyHead::Gaussian { dim, bound } => {
                                let (raw, lp) =
                                    gaussian_act(&out, &agent.log_std, &mut worker.rng, false)?;
                                let ent: f64 = agent
                                    .log_std
                                    .iter()
                                    .map(|ls| ls + 0.5 * (1.0 + (2.0 * std::f64::consts::PI).ln()))
                                    .sum();
                                if let ActionBatch::Continuous { data, .. } = &mut seg.actions[ai] {
                                    debug_assert_eq!(raw.len(), *dim);
                                    data.extend_from_slice(&raw);
                                }
                                seg.logps[ai].push(lp);
                                seg.entropies[ai].push(ent);
                                joint.push(Action::Continuous(
                                    raw.iter().map(|a| a.clamp(-bound, *bound)).collect(),
                                ));
                            }
                        }
                    }
                    let (v, _) = critic.forward(&obs, 1)?;
                    let t = worker
                        .env
                        .step(&joint)
                        .map_err(|source| TrainError::Env { worker: widx, source })?;
                    seg.states.extend_from_slice(&obs);
                    seg.values.push(v[0]);
                    seg.rewards.push(t.reward);
                    seg.dones.push(t.done);
                    worker.running_return += t.reward;
                    if t.done {
                        seg.completed.push(worker.running_return);
                        worker.running_return = 0.0;
                        worker.obs = worker.env.reset();
                    } else {
                        worker.obs = t.next_state;
                    }
                }
                if *seg.dones.last().unwrap() {
                    seg.bootstrap = 0.0;
                } else {
                    let (v, _) = critic.forward(&worker.obs, 1)?;
                    seg.bootstrap = v[0];
                }
                Ok(seg)
            })
            .collect();

        let len = self.cfg.rollout_threads * steps;
        let mut batch = RolloutBatch {
            states: Vec::with_capacity(len * obs_dim),
            obs_dim,
            len,
            actions: self
                .agents
                .iter()
                .map(|a| match &a.head {
                    PolicyHead::Categorical { .. } => ActionBatch::Discrete(Vec::with_capacity(len)),
                    PolicyHead::Gaussian { dim, .. } => ActionBatch::Continuous {
                        dim: *dim,
                        data: Vec::with_capacity(len * dim),
                    },
                })
                .collect(),
            behavior_logps: vec![Vec::with_capacity(len); self.agents.len()],
            entropies: vec![Vec::with_capacity(len); self.agents.len()],
            rewards: Vec::with_capacity(len),
            values: Vec::with_capacity(len),
            dones: Vec::with_capacity(len),
            bootstrap: Vec::with_capacity(self.cfg.rollout_threads),
            segment_len: steps,
            completed_returns: Vec::new(),
        };
        for seg in segments {
            let seg = seg?;
            batch.states.extend_from_slice(&seg.states);
            for (ai, actions) in seg.actions.into_iter().enumerate() {
                match (&mut batch.actions[ai], actions) {
                    (ActionBatch::Discrete(dst), ActionBatch::Discrete(src)) => dst.extend(src),
                    (
                        ActionBatch::Continuous { data: dst, .. },
                        ActionBatch::Continuous { data: src, .. },
                    ) => dst.extend(src),
                    _ => unreachable!("action kinds are fixed per agent"),
                }
                batch.behavior_logps[ai].extend(&seg.logps[ai]);
                batch.entropies[ai].extend(&seg.entropies[ai]);
            }
            batch.rewards.extend(seg.rewards);
            batch.values.extend(seg.values);
            batch.dones.extend(seg.dones);
            batch.bootstrap.push(seg.bootstrap);
            batch.completed_returns.extend(seg.completed);
        }
        self.env_steps += len;
        Ok(batch)
    }

    /// One full cycle: collect, estimate advantages, shape, update all
    /// agents simultaneously plus the critic, and report metrics.
    pub fn train_iteration(&mut self) -> Result<IterationMetrics, TrainError> {
        let batch = self.collect_rollout()?;
        self.update(&batch)
    }

    fn shaped_advantages(&self, raw: &[f64]) -> Result<Vec<f64>, TrainError> {
        if self.cfg.bypass_shaping {
            return Ok(raw.to_vec());
        }
        Ok(advantage::shape_advantages(raw, self.cfg.eta, self.cfg.scale_mode)?)
    }

    /// Policy and critic updates on a collected batch; dispatches between
    /// the clipped-surrogate and the plain policy-gradient rule.
    pub fn update(&mut self, batch: &RolloutBatch) -> Result<IterationMetrics, TrainError> {
        // per-segment advantage estimation, concatenated
        let mut raw_adv = Vec::with_capacity(batch.len);
        let mut targets = Vec::with_capacity(batch.len);
        let seg = batch.segment_len;
        for w in 0..batch.len / seg {
            let r = &batch.rewards[w * seg..(w + 1) * seg];
            let v = &batch.values[w * seg..(w + 1) * seg];
            let d = &batch.dones[w * seg..(w + 1) * seg];
            let deltas = advantage::td_errors(r, v, batch.bootstrap[w], d, self.cfg.gamma)?;
            let adv = advantage::gae(&deltas, self.cfg.gamma, self.cfg.lam, d)?;
            targets.extend(advantage::value_targets(&adv, v)?);
            raw_adv.extend(adv);
        }
        let shaped = self.shaped_advantages(&raw_adv)?;
        let frac_clipped = if self.cfg.bypass_shaping || self.cfg.eta >= 1.0 {
            0.0
        } else {
            raw_adv.iter().filter(|a| **a < 0.0).count() as f64 / raw_adv.len() as f64
        };
        let mean_raw_adv = raw_adv.iter().sum::<f64>() / raw_adv.len() as f64;

        let (epochs, minibatches) = match self.cfg.algo {
            Algo::OptiMappo => (self.cfg.ppo_epochs, self.cfg.num_minibatch),
            Algo::OptiMaa2c => (1, 1),
        };
        let mb_size = batch.len / minibatches;

        let mut policy_loss_sum = 0.0;
        let mut value_loss_sum = 0.0;
        let mut n_updates = 0usize;

        for _ in 0..epochs {
            let mut order: Vec<usize> = (0..batch.len).collect();
            if minibatches > 1 || epochs > 1 {
                // Fisher-Yates with the update stream; part of the
                // determinism contract
                for i in (1..order.len()).rev() {
                    let j = self.update_rng.gen_range(0..=i);
                    order.swap(i, j);
                }
            }
            for mb in 0..minibatches {
                let idx = &order[mb * mb_size..(mb + 1) * mb_size];
                let states = self.gather_states(batch, idx);
                for ai in 0..self.agents.len() {
                    let loss = self.update_policy(ai, batch, idx, &states, &shaped)?;
                    policy_loss_sum += loss;
                }
                value_loss_sum += self.update_critic(idx, &states, &targets)?;
                n_updates += 1;
            }
        }

        self.iteration += 1;
        let entropy = batch
            .entropies
            .iter()
            .map(|e| e.iter().sum::<f64>() / e.len() as f64)
            .collect();
        let (mean_return, max_return) = if batch.completed_returns.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let n = batch.completed_returns.len() as f64;
            (
                batch.completed_returns.iter().sum::<f64>() / n,
                batch
                    .completed_returns
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        };
        Ok(IterationMetrics {
            iteration: self.iteration,
            env_steps: self.env_steps,
            mean_return,
            max_return,
            policy_loss: policy_loss_sum / (n_updates * self.agents.len()) as f64,
            value_loss: value_loss_sum / n_updates as f64,
            entropy,
            frac_adv_clipped: frac_clipped,
            mean_raw_adv,
        })
    }

    fn gather_states(&self, batch: &RolloutBatch, idx: &[usize]) -> Vec<f64> {
        let d = batch.obs_dim;
        let mut out = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            out.extend_from_slice(&batch.states[i * d..(i + 1) * d]);
        }
        out
    }

    fn update_policy(
        &mut self,
        ai: usize,
        batch: &RolloutBatch,
        idx: &[usize],
        shaped: &[f64],
    ) -> Result<f64, TrainError> {
        let states = self.gather_states(batch, idx);
        let m = idx.len();
        let adv: Vec<f64> = idx.iter().map(|&i| shaped[i]).collect();
        let old_lp: Vec<f64> = idx.iter().map(|&i| batch.behavior_logps[ai][i]).collect();
        let agent = &self.agents[ai];

        let (loss, mut grads, ls_grads) = match (&agent.head, &batch.actions[ai]) {
            (PolicyHead::Categorical { n_actions }, ActionBatch::Discrete(actions)) => {
                let acts: Vec<usize> = idx.iter().map(|&i| actions[i]).collect();
                let (loss, grads) = match self.cfg.algo {
                    Algo::OptiMappo => categorical_ppo_grads(
                        &agent.net, &states, m, &acts, &old_lp, &adv, *n_actions,
                        self.cfg.clip_eps, self.cfg.entropy_coef, ai,
                    )?,
                    Algo::OptiMaa2c => categorical_a2c_grads(
                        &agent.net, &states, m, &acts, &adv, *n_actions, self.cfg.entropy_coef,
                    )?,
                };
                (loss, grads, Vec::new())
            }
            (PolicyHead::Gaussian { dim, .. }, ActionBatch::Continuous { data, .. }) => {
                let mut acts = Vec::with_capacity(m * dim);
                for &i in idx {
                    acts.extend_from_slice(&data[i * dim..(i + 1) * dim]);
                }
                match self.cfg.algo {
                    Algo::OptiMappo => gaussian_ppo_grads(
                        &agent.net, &agent.log_std, &states, m, &acts, &old_lp, &adv,
                        self.cfg.clip_eps, self.cfg.entropy_coef, ai,
                    )?,
                    Algo::OptiMaa2c => gaussian_a2c_grads(
                        &agent.net, &agent.log_std, &states, m, &acts, &adv,
                        self.cfg.entropy_coef,
                    )?,
                }
            }
            _ => unreachable!("action batch kind matches the head"),
        };

        let mut ls_grads = ls_grads;
        clip_global_norm(&mut grads, &mut ls_grads, self.cfg.max_grad_norm);

        let agent = &mut self.agents[ai];
        let mut params = agent.net.param_blocks_mut();
        if !agent.log_std.is_empty() {
            params.push(agent.log_std.as_mut_slice());
        }
        let mut gblocks = grads.blocks();
        if !ls_grads.is_empty() {
            gblocks.push(&ls_grads);
        }
        agent.opt.step(&mut params, &gblocks)?;
        Ok(loss)
    }

    fn update_critic(
        &mut self,
        batch: &RolloutBatch,
        idx: &[usize],
        targets: &[f64],
    ) -> Result<f64, TrainError> {
        let states = self.gather_states(batch, idx);
        let m = idx.len();
        let tg: Vec<f64> = idx.iter().map(|&i| targets[i]).collect();
        let (loss, mut grads) = critic_mse_grads(&self.critic, &states, m, &tg)?;
        let mut empty = Vec::new();
        clip_global_norm(&mut grads, &mut empty, self.cfg.max_grad_norm);
        let mut params = self.critic.param_blocks_mut();
        self.critic_opt.step(&mut params, &grads.blocks())?;
        Ok(loss)
    }

    /// Greedy or sampled evaluation on a fresh environment; never touches
    /// trainer state or rng streams. Returns (mean return, max return).
    pub fn evaluate(&self, episodes: usize, greedy: bool, seed: u64) -> Result<(f64, f64), TrainError> {
        let snapshot = self.policy_snapshot();
        evaluate_policies(&self.env_spec, &snapshot, episodes, greedy, seed)
    }

    /// Serialized policies + critic; see README for the byte layout.
    pub fn checkpoint_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"OMAC");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.agents.len() as u32).to_le_bytes());
        for agent in &self.agents {
            out.extend_from_slice(&(agent.log_std.len() as u32).to_le_bytes());
            for ls in &agent.log_std {
                out.extend_from_slice(&ls.to_le_bytes());
            }
            out.extend_from_slice(&mlp_to_bytes(&agent.net));
        }
        out.extend_from_slice(&mlp_to_bytes(&self.critic));
        out
    }
}

/// Parses checkpoint bytes into per-agent (policy, log_std) pairs and the
/// critic network.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(PolicySnapshot, Mlp), TrainError> {
    let err = |msg: &str| TrainError::Nn(NnError::BadCheckpoint(msg.into()));
    if bytes.len() < 12 || &bytes[0..4] != b"OMAC" {
        return Err(err("wrong magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != 1 {
        return Err(err("unsupported version"));
    }
    let n_agents = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if n_agents == 0 || n_agents > 64 {
        return Err(err("implausible agent count"));
    }
    let mut pos = 12usize;
    let mut nets = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        if pos + 4 > bytes.len() {
            return Err(err("truncated"));
        }
        let ls_len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        if pos + 8 * ls_len > bytes.len() {
            return Err(err("truncated log_std"));
        }
        let mut log_std = Vec::with_capacity(ls_len);
        for k in 0..ls_len {
            log_std.push(f64::from_le_bytes(
                bytes[pos + 8 * k..pos + 8 * (k + 1)].try_into().unwrap(),
            ));
        }
        pos += 8 * ls_len;
        let (net, used) = mlp_from_bytes(&bytes[pos..])?;
        pos += used;
        nets.push((net, log_std));
    }
    let (critic, used) = mlp_from_bytes(&bytes[pos..])?;
    pos += used;
    if pos != bytes.len() {
        return Err(err("trailing bytes"));
    }
    Ok((PolicySnapshot { nets }, critic))
}

/// Runs `episodes` episodes of the snapshot policies on a fresh env.
pub fn evaluate_policies(
    env_spec: &EnvSpec,
    snapshot: &PolicySnapshot,
    episodes: usize,
    greedy: bool,
    seed: u64,
) -> Result<(f64, f64), TrainError> {
    let mut env = make_env(env_spec).map_err(|source| TrainError::Env { worker: 0, source })?;
    let spaces = env.action_spaces();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX); // never collides with worker streams
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset();
        let mut total = 0.0;
        loop {
            let mut joint = Vec::with_capacity(snapshot.nets.len());
            for ai in 0..snapshot.nets.len() {
                joint.push(snapshot.act(ai, &obs, &spaces[ai], &mut rng, greedy)?);
            }
            let t = env
                .step(&joint)
                .map_err(|source| TrainError::Env { worker: 0, source })?;
            total += t.reward;
            if t.done {
                break;
            }
            obs = t.next_state;
        }
        returns.push(total);
    }
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let max = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, max))
}

fn clip_global_norm(grads: &mut Grads, extra: &mut [f64], max_norm: f64) {
    let norm_sq = grads.global_norm().powi(2) + extra.iter().map(|x| x * x).sum::<f64>();
    let norm = norm_sq.sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.scale(s);
        for x in extra.iter_mut() {
            *x *= s;
        }
    }
}

/// Clipped-surrogate loss and gradients for a categorical policy:
/// `-mean(min(r*A, clip(r, 1 +- eps)*A)) - entropy_coef * mean(H)`.
#[allow(clippy::too_many_arguments)]
fn categorical_ppo_grads(
    net: &Mlp,
    states: &[f64],
    m: usize,
    actions: &[usize],
    old_logps: &[f64],
    advantages: &[f64],
    n_actions: usize,
    clip_eps: f64,
    entropy_coef: f64,
    agent: usize,
) -> Result<(f64, Grads), TrainError> {
    let (logits, cache) = net.forward(states, m)?;
    let mut dlogits = vec![0.0; m * n_actions];
    let mut loss = 0.0;
    for i in 0..m {
        let row = &logits[i * n_actions..(i + 1) * n_actions];
        let lp = log_softmax(row);
        let lpa = lp[actions[i]];
        let ratio = (lpa - old_logps[i]).exp();
        if !ratio.is_finite() {
            return Err(TrainError::NonFiniteRatio {
                agent,
                detail: format!("sample {i}: new {lpa}, old {}", old_logps[i]),
            });
        }
        let a = advantages[i];
        let unclipped = ratio * a;
        let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * a;
        let (obj, dobj_dlpa) = if unclipped <= clipped {
            (unclipped, ratio * a)
        } else {
            (clipped, 0.0)
        };
        let entropy = softmax_entropy(&lp);
        loss += -obj - entropy_coef * entropy;
        let drow = &mut dlogits[i * n_actions..(i + 1) * n_actions];
        for k in 0..n_actions {
            let p = lp[k].exp();
            let onehot = if k == actions[i] { 1.0 } else { 0.0 };
            // d(-obj)/dlogits
            drow[k] += -dobj_dlpa * (onehot - p) / m as f64;
            // d(-coef*H)/dlogits, with dH/dlogit_k = -p_k*(lp_k + H)
            drow[k] += entropy_coef * p * (lp[k] + entropy) / m as f64;
        }
    }
    loss /= m as f64;
    let grads = net.backward(&cache, &dlogits)?;
    Ok((loss, grads))
}

/// Plain policy-gradient loss for a categorical policy:
/// `-mean(A * log pi(a|s)) - entropy_coef * mean(H)`.
fn categorical_a2c_grads(
    net: &Mlp,
    states: &[f64],
    m: usize,
    actions: &[usize],
    advantages: &[f64],
    n_actions: usize,
    entropy_coef: f64,
) -> Result<(f64, Grads), TrainError> {
    let (logits, cache) = net.forward(states, m)?;
    let mut dlogits = vec![0.0; m * n_actions];
    let mut loss = 0.0;
    for i in 0..m {
        let row = &logits[i * n_actions..(i + 1) * n_actions];
        let lp = log_softmax(row);
        let a = advantages[i];
        let entropy = softmax_entropy(&lp);
        loss += -a * lp[actions[i]] - entropy_coef * entropy;
        let drow = &mut dlogits[i * n_actions..(i + 1) * n_actions];
        for k in 0..n_actions {
            let p = lp[k].exp();
            let onehot = if k == actions[i] { 1.0 } else { 0.0 };
            drow[k] += -a * (onehot - p) / m as f64;
            drow[k] += entropy_coef * p * (lp[k] + entropy) / m as f64;
        }
    }
    loss /= m as f64;
    let grads = net.backward(&cache, &dlogits)?;
    Ok((loss, grads))
}

/// Clipped-surrogate loss and gradients for a diagonal-Gaussian policy.
/// Returns (loss, net grads, log_std grads).
#[allow(clippy::too_many_arguments)]
fn gaussian_ppo_grads(
    net: &Mlp,
    log_std: &[f64],
    states: &[f64],
    m: usize,
    actions: &[f64],
    old_logps: &[f64],
    advantages: &[f64],
    clip_eps: f64,
    entropy_coef: f64,
    agent: usize,
) -> Result<(f64, Grads, Vec<f64>), TrainError> {
    let dim = log_std.len();
    let (means, cache) = net.forward(states, m)?;
    let mut dmean = vec![0.0; m * dim];
    let mut dls = vec![0.0; dim];
    let mut loss = 0.0;
    let entropy: f64 = log_std
        .iter()
        .map(|ls| ls + 0.5 * (1.0 + (2.0 * std::f64::consts::PI).ln()))
        .sum();
    for i in 0..m {
        let mu = &means[i * dim..(i + 1) * dim];
        let act = &actions[i * dim..(i + 1) * dim];
        let lpa = gaussian_log_prob(act, mu, log_std);
        let ratio = (lpa - old_logps[i]).exp();
        if !ratio.is_finite() {
            return Err(TrainError::NonFiniteRatio {
                agent,
                detail: format!("sample {i}: new {lpa}, old {}", old_logps[i]),
            });
        }
        let a = advantages[i];
        let unclipped = ratio * a;
        let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * a;
        let (obj, dobj_dlpa) = if unclipped <= clipped {
            (unclipped, ratio * a)
        } else {
            (clipped, 0.0)
        };
        loss += -obj;
        for d in 0..dim {
            let sig = log_std[d].exp();
            let z = (act[d] - mu[d]) / sig;
            dmean[i * dim + d] += -dobj_dlpa * z / sig / m as f64;
            dls[d] += -dobj_dlpa * (z * z - 1.0) / m as f64;
        }
    }
    loss = loss / m as f64 - entropy_coef * entropy;
    // mean entropy is state-independent: dH/dlog_std_d = 1
    for d in 0..dim {
        dls[d] += -entropy_coef;
    }
    let grads = net.backward(&cache, &dmean)?;
    Ok((loss, grads, dls))
}

/// Plain policy-gradient loss for a diagonal-Gaussian policy.
fn gaussian_a2c_grads(
    net: &Mlp,
    log_std: &[f64],
    states: &[f64],
    m: usize,
    actions: &[f64],
    advantages: &[f64],
    entropy_coef: f64,
) -> Result<(f64, Grads, Vec<f64>), TrainError> {
    let dim = log_std.len();
    let (means, cache) = net.forward(states, m)?;
    let mut dmean = vec![0.0; m * dim];
    let mut dls = vec![0.0; dim];
    let mut loss = 0.0;
    let entropy: f64 = log_std
        .iter()
        .map(|ls| ls + 0.5 * (1.0 + (2.0 * std::f64::consts::PI).ln()))
        .sum();
    for i in 0..m {
        let mu = &means[i * dim..(i + 1) * dim];
        let act = &actions[i * dim..(i + 1) * dim];
        let lpa = gaussian_log_prob(act, mu, log_std);
        let a = advantages[i];
        loss += -a * lpa;
        for d in 0..dim {
            let sig = log_std[d].exp();
            let z = (act[d] - mu[d]) / sig;
            dmean[i * dim + d] += -a * z / sig / m as f64;
            dls[d] += -a * (z * z - 1.0) / m as f64;
        }
    }
    loss = loss / m as f64 - entropy_coef * entropy;
    for d in 0..dim {
        dls[d] += -entropy_coef;
    }
    let grads = net.backward(&cache, &dmean)?;
    Ok((loss, grads, dls))
}

/// Mean-squared-error critic loss `0.5 * mean((V(s) - target)^2)`.
fn critic_mse_grads(
    critic: &Mlp,
    states: &[f64],
    m: usize,
    targets: &[f64],
) -> Result<(f64, Grads), TrainError> {
    let (v, cache) = critic.forward(states, m)?;
    let mut dv = vec![0.0; m];
    let mut loss = 0.0;
    for i in 0..m {
        let err = v[i] - targets[i];
        loss += 0.5 * err * err;
        dv[i] = err / m as f64;
    }
    loss /= m as f64;
    let grads = critic.backward(&cache, &dv)?;
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::MatrixGameSpec;
    use crate::nn::finite_diff_check;

    fn climbing_spec() -> EnvSpec {
        EnvSpec::Matrix(MatrixGameSpec::climbing())
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            rollout_threads: 2,
            steps_per_thread: 25,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_validation_catches_bad_minibatch_split() {
        let cfg = TrainConfig { num_minibatch: 3, ..small_cfg() }; // 50 % 3 != 0
        assert!(Trainer::new(climbing_spec(), cfg).is_err());
    }

    #[test]
    fn rollout_has_expected_shape_and_rewards() {
        let mut t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let b = t.collect_rollout().unwrap();
        assert_eq!(b.len, 50);
        assert_eq!(b.rewards.len(), 50);
        assert_eq!(b.states.len(), 50 * 4);
        assert_eq!(b.behavior_logps.len(), 2);
        // 2 workers x one 25-step episode each
        assert_eq!(b.completed_returns.len(), 2);
        // rewards must come from the climbing matrix
        let legal: Vec<f64> = MatrixGameSpec::climbing().payoff.iter().flatten().cloned().collect();
        assert!(b.rewards.iter().all(|r| legal.contains(r)));
    }

    #[test]
    fn rollouts_are_deterministic_across_trainers() {
        let mut a = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let mut b = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let ra = a.collect_rollout().unwrap();
        let rb = b.collect_rollout().unwrap();
        assert_eq!(ra.rewards, rb.rewards);
        assert_eq!(ra.values, rb.values);
        assert_eq!(ra.behavior_logps, rb.behavior_logps);
    }

    #[test]
    fn fixed_pure_policy_earns_eleven_per_step() {
        // force both policies to play action 0 via huge logits
        let mut t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        for agent in &mut t.agents {
            let last = agent.net.layers.last_mut().unwrap();
            for x in last.w.iter_mut() {
                *x = 0.0;
            }
            last.b = vec![50.0, 0.0, 0.0];
        }
        let b = t.collect_rollout().unwrap();
        assert!(b.rewards.iter().all(|r| *r == 11.0));
        let (mean, max) = t.evaluate(10, true, 7).unwrap();
        assert_eq!(mean, 275.0);
        assert_eq!(max, 275.0);
    }

    #[test]
    fn ratio_one_surrogate_equals_mean_advantage() {
        // theta == theta_old: ratio 1, surrogate = -mean(adv), entropy off
        let net = Mlp::init(&[4, 8, 3], 3).unwrap();
        let states = vec![1.0; 8];
        let actions = vec![0usize, 2];
        let old: Vec<f64> = (0..2)
            .map(|i| {
                let (logits, _) = net.forward(&states[i * 4..(i + 1) * 4], 1).unwrap();
                log_softmax(&logits)[actions[i]]
            })
            .collect();
        let adv = vec![2.0, 0.0];
        let (loss, _) =
            categorical_ppo_grads(&net, &states, 2, &actions, &old, &adv, 3, 0.2, 0.0, 0).unwrap();
        assert!((loss - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn clipped_branch_kills_the_gradient() {
        // ratio = 1.5 > 1 + eps with positive advantage: objective 1.2,
        // gradient exactly zero
        let net = Mlp::init(&[4, 8, 3], 4).unwrap();
        let states = vec![0.5; 4];
        let actions = vec![1usize];
        let (logits, _) = net.forward(&states, 1).unwrap();
        let lpa = log_softmax(&logits)[1];
        let old = vec![lpa - 1.5f64.ln()];
        let adv = vec![1.0];
        let (loss, grads) =
            categorical_ppo_grads(&net, &states, 1, &actions, &old, &adv, 3, 0.2, 0.0, 0).unwrap();
        assert!((loss - (-1.2)).abs() < 1e-9);
        assert_eq!(grads.global_norm(), 0.0);
    }

    #[test]
    fn eta_zero_surrogate_bounded_by_clip() {
        // with nonnegative advantages, min(r*A, clip(r)*A) <= (1+eps)*A
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(0.0..5.0);
            let ratio: f64 = rng.gen_range(0.0..3.0);
            let clipped = ratio.clamp(0.8, 1.2) * a;
            let obj = (ratio * a).min(clipped);
            assert!(obj <= 1.2 * a + 1e-12);
        }
    }

    #[test]
    fn critic_loss_examples() {
        let mut critic = Mlp::init(&[2, 1], 0).unwrap();
        critic.layers[0].w = vec![0.0, 0.0];
        critic.layers[0].b = vec![0.0];
        // V == 0, target 2 on one sample: loss = 0.5*4 = 2
        let (loss, _) = critic_mse_grads(&critic, &[1.0, 1.0], 1, &[2.0]).unwrap();
        assert_eq!(loss, 2.0);
        // V == target: zero loss, zero gradient
        let (loss, grads) = critic_mse_grads(&critic, &[1.0, 1.0], 1, &[0.0]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grads.global_norm(), 0.0);
    }

    #[test]
    fn policy_and_critic_grads_pass_finite_difference() {
        let net = Mlp::init(&[4, 8, 3], 12).unwrap();
        let states = vec![0.3, -0.5, 0.8, 1.0, -0.2, 0.4, 0.9, -1.1];
        let actions = vec![2usize, 0];
        let old = vec![-1.2, -0.9];
        let adv = vec![1.5, -0.7];
        let err = finite_diff_check(
            &net,
            |m| {
                let (l, g) = categorical_ppo_grads(
                    m, &states, 2, &actions, &old, &adv, 3, 0.2, 0.01, 0,
                )
                .unwrap();
                (l, g)
            },
            20,
            3,
        );
        assert!(err < 1e-4, "ppo grads relative error {err}");

        let err = finite_diff_check(
            &net,
            |m| categorical_a2c_grads(m, &states, 2, &actions, &adv, 3, 0.01).unwrap(),
            20,
            4,
        );
        assert!(err < 1e-4, "a2c grads relative error {err}");

        let critic = Mlp::init(&[4, 8, 1], 13).unwrap();
        let err = finite_diff_check(
            &critic,
            |m| critic_mse_grads(m, &states, 2, &[0.7, -0.3]).unwrap(),
            20,
            5,
        );
        assert!(err < 1e-4, "critic grads relative error {err}");

        // gaussian heads (net output = mean)
        let gnet = Mlp::init(&[4, 8, 1], 14).unwrap();
        let acts = vec![0.4, -1.0];
        let gold = vec![-1.0, -1.3];
        let err = finite_diff_check(
            &gnet,
            |m| {
                let (l, g, _) = gaussian_ppo_grads(
                    m, &[0.2], &states, 2, &acts, &gold, &adv, 0.2, 0.01, 0,
                )
                .unwrap();
                (l, g)
            },
            20,
            6,
        );
        assert!(err < 1e-4, "gaussian ppo grads relative error {err}");
    }

    #[test]
    fn log_std_gradient_matches_finite_difference() {
        let net = Mlp::init(&[4, 8, 1], 21).unwrap();
        let states = vec![0.3, -0.5, 0.8, 1.0, -0.2, 0.4, 0.9, -1.1];
        let acts = vec![0.4, -1.0];
        let old = vec![-1.0, -1.3];
        let adv = vec![1.5, -0.7];
        let ls = 0.3f64;
        let f = |lsv: f64| {
            let (l, _, _) =
                gaussian_ppo_grads(&net, &[lsv], &states, 2, &acts, &old, &adv, 0.2, 0.01, 0)
                    .unwrap();
            l
        };
        let h = 1e-6;
        let fd = (f(ls + h) - f(ls - h)) / (2.0 * h);
        let (_, _, dls) =
            gaussian_ppo_grads(&net, &[ls], &states, 2, &acts, &old, &adv, 0.2, 0.01, 0).unwrap();
        assert!((fd - dls[0]).abs() / fd.abs().max(1e-8) < 1e-4, "fd {fd} vs {}", dls[0]);
    }

    #[test]
    fn grad_norm_clipping_bounds_global_norm() {
        let net = Mlp::init(&[3, 4, 2], 8).unwrap();
        let mut grads = Grads::zeros_like(&net);
        for l in &mut grads.layers {
            for x in l.w.iter_mut().chain(l.b.iter_mut()) {
                *x = 100.0;
            }
        }
        let mut extra = vec![50.0, -25.0];
        clip_global_norm(&mut grads, &mut extra, 1.0);
        let norm = (grads.global_norm().powi(2) + extra.iter().map(|x| x * x).sum::<f64>()).sqrt();
        assert!(norm <= 1.0 + 1e-9, "clipped norm {norm}");
    }

    #[test]
    fn ratio_is_one_at_epoch_start() {
        let mut t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let b = t.collect_rollout().unwrap();
        for ai in 0..2 {
            if let ActionBatch::Discrete(actions) = &b.actions[ai] {
                for i in 0..b.len {
                    let obs = &b.states[i * 4..(i + 1) * 4];
                    let (logits, _) = t.agents[ai].net.forward(obs, 1).unwrap();
                    let lp = log_softmax(&logits)[actions[i]];
                    assert!((lp - b.behavior_logps[ai][i]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn eta_one_matches_bypass_path_bit_exactly() {
        let run = |bypass: bool| {
            let cfg = TrainConfig {
                eta: 1.0,
                bypass_shaping: bypass,
                rollout_threads: 2,
                ..small_cfg()
            };
            let mut t = Trainer::new(climbing_spec(), cfg).unwrap();
            for _ in 0..10 {
                t.train_iteration().unwrap();
            }
            t.checkpoint_bytes()
        };
        assert_eq!(run(false), run(true));
    }

    #[test]
    fn training_is_reproducible_bit_exactly() {
        let run = || {
            let mut t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
            for _ in 0..5 {
                t.train_iteration().unwrap();
            }
            t.checkpoint_bytes()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn a2c_zero_advantages_leave_policy_unchanged() {
        let cfg = TrainConfig { algo: Algo::OptiMaa2c, entropy_coef: 0.0, ..small_cfg() };
        let mut t = Trainer::new(climbing_spec(), cfg).unwrap();
        let before: Vec<Vec<u8>> = t.agents.iter().map(|a| mlp_to_bytes(&a.net)).collect();
        let b = t.collect_rollout().unwrap();
        let shaped = vec![0.0; b.len];
        let idx: Vec<usize> = (0..b.len).collect();
        for ai in 0..2 {
            t.update_policy(ai, &b, &idx, &shaped).unwrap();
        }
        let after: Vec<Vec<u8>> = t.agents.iter().map(|a| mlp_to_bytes(&a.net)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn checkpoint_roundtrip_preserves_networks() {
        let t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let bytes = t.checkpoint_bytes();
        let (snapshot, critic) = load_checkpoint(&bytes).unwrap();
        assert_eq!(snapshot.nets.len(), 2);
        assert_eq!(snapshot.nets[0].0, t.agents[0].net);
        assert_eq!(critic, t.critic);
    }

    #[test]
    fn metrics_fields_are_populated() {
        let mut t = Trainer::new(climbing_spec(), small_cfg()).unwrap();
        let m = t.train_iteration().unwrap();
        assert_eq!(m.iteration, 1);
        assert_eq!(m.env_steps, 50);
        assert_eq!(m.entropy.len(), 2);
        assert!(m.mean_return.is_finite());
        assert!(m.frac_adv_clipped >= 0.0 && m.frac_adv_clipped <= 1.0);
        // near-uniform fresh policies on 3 actions
        assert!((m.entropy[0] - 3.0f64.ln()).abs() < 0.01);
    }
}
