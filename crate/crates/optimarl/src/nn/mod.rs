//! Minimal differentiable function-approximation core: tanh MLPs with explicit
//! forward/backward passes, Adam, categorical and diagonal-Gaussian policy
//! heads, and a finite-difference gradient checker.

mod adam;
mod checkpoint;
mod gradcheck;
mod heads;
mod mlp;

pub use adam::AdamState;
pub use checkpoint::{mlp_from_bytes, mlp_to_bytes};
pub use gradcheck::finite_diff_check;
pub use heads::{categorical_act, gaussian_act, gaussian_log_prob, log_softmax, softmax_entropy};
pub use mlp::{Cache, Grads, Mlp};

use std::fmt;

/// Errors from the function-approximation layer.
#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    /// Input or gradient width does not match the network shape.
    ShapeMismatch { expected: usize, got: usize },
    /// Layer size list is empty, too short, or contains a zero.
    InvalidSizes(String),
    /// A non-finite value reached a place that must stay finite.
    NonFinite(&'static str),
    /// Checkpoint bytes are truncated or carry a wrong magic/header.
    BadCheckpoint(String),
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected width {expected}, got {got}")
            }
            NnError::InvalidSizes(msg) => write!(f, "invalid layer sizes: {msg}"),
            NnError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            NnError::BadCheckpoint(msg) => write!(f, "bad checkpoint: {msg}"),
        }
    }
}

impl std::error::Error for NnError {}
