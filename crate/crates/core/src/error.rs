use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown robot `{0}`")]
    UnknownRobot(String),
    #[error("no configuration assigned to robot `{0}`")]
    MissingAssignment(String),
    #[error("scene must be frozen before collision queries")]
    NotFrozen,
    #[error("world is frozen")]
    WorldFrozen,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("joint {joint} value {value} outside limits [{lo}, {hi}]")]
    OutOfLimits {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("state is in collision")]
    StateInCollision,
    #[error("goal kind mismatch: {0}")]
    KindMismatch(String),
    #[error("goal lies in an occupied voxel")]
    GoalInOccupiedVoxel,
    #[error("point outside grid bounds")]
    OutOfBounds,
    #[error("start configuration is invalid: {0}")]
    StartInvalid(String),
    #[error("no path exists")]
    NoPathExists,
    #[error("time limit reached")]
    Timeout,
    #[error("worker count must be at least 1")]
    InvalidWorkerCount,
    #[error("lattice has {size} states, above the cap of {cap}")]
    LatticeTooLarge { size: u128, cap: u128 },
    #[error("start configurations are in collision")]
    StartsInCollision,
    #[error("unknown planner id `{0}`")]
    UnknownPlannerId(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },
    #[error("velocity limits must be positive")]
    InvalidVmax,
    #[error("empty input")]
    EmptyInput,
    #[error("mean is zero")]
    ZeroMean,
    #[error("every planner failed")]
    AllFailed,
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("i/o error on {path:?}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
