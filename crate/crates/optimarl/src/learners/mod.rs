//! OptiMAPPO / OptiMAA2C trainers: parallel rollout collection, per-agent
//! independent policy updates on shaped advantages, centralized critic
//! regression, and greedy evaluation.

mod fixed_point;
mod trainer;

pub use fixed_point::{fixed_point_check, FixedPointError, TabularMdp};
pub use trainer::{
    load_checkpoint, Algo, IterationMetrics, PolicySnapshot, RolloutBatch, TrainConfig,
    TrainError, Trainer,
};
