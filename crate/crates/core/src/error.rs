use thiserror::Error;

use crate::exact::OracleError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("weight error: agent {agent} has weight {weight}, expected >= 1")]
    Weight { agent: usize, weight: i64 },

    #[error("element error: set {set} references element {element} but n = {n}")]
    ElementRange { set: usize, element: usize, n: usize },

    #[error("coverage error: element {element} is not contained in any set")]
    Coverage { element: usize },

    #[error("label error: {0}")]
    Labels(String),

    #[error("set index {index} out of range (k = {k})")]
    SetIndex { index: usize, k: usize },

    #[error("duplicate set index {index}")]
    DuplicateIndex { index: usize },

    #[error("round {round} out of range (trace has {rounds} rounds)")]
    RoundRange { round: usize, rounds: usize },

    #[error("invalid generator spec: {0}")]
    GenSpec(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("invalid cover: element {element} is uncovered")]
    InvalidCover { element: usize },

    #[error(transparent)]
    Oracle(#[from] OracleError),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
