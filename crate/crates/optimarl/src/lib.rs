//! Cooperative multi-agent policy-gradient training with optimistic
//! advantage shaping, plus the matrix-game, gridworld, and continuous
//! coordination environments used to study relative overgeneralization.

pub mod advantage;
pub mod dynamics;
pub mod envs;
pub mod hysteretic;
pub mod learners;
pub mod nn;
