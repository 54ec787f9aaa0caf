//! Error types shared across the simulator and trainer.

use thiserror::Error;

/// Errors raised by the simulator layers (channel, energy, mobility, env).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// An input violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A commanded motion cannot be completed within one slot.
    #[error("infeasible action: {0}")]
    InfeasibleAction(String),
    /// A policy action contained non-finite components.
    #[error("invalid action for agent {agent}: {reason}")]
    InvalidAction { agent: usize, reason: String },
}

/// Configuration loading/validation failure, carrying the offending field path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

/// Errors raised by the neural-network toolkit.
#[derive(Debug, Error)]
pub enum NnetError {
    #[error("parameter `{0}` already registered")]
    DuplicateParam(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("shape mismatch for `{name}`: expected {expected} elements, got {got}")]
    ShapeMismatch { name: String, expected: usize, got: usize },
    /// A forward cache was consumed by backward twice.
    #[error("forward graph already consumed by backward")]
    GraphConsumed,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid checkpoint: {0}")]
    BadCheckpoint(String),
}

/// Errors that abort a training run.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Nnet(#[from] NnetError),
    #[error("non-finite loss at iteration {iter}: {detail}")]
    NanLoss { iter: usize, detail: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
