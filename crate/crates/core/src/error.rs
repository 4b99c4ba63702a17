use thiserror::Error;

use crate::model::{NodeId, TaskId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invalid task {task}: {reason}")]
    Task { task: TaskId, reason: String },

    #[error("no link from node {from} to node {to}")]
    MissingLink { from: NodeId, to: NodeId },

    #[error("reliability target {0} cannot be reached")]
    Unreachable(f64),

    #[error("rhythmic period {period} at step {step} is shorter than the {hops}-hop demand")]
    InfeasibleRhythmicSpec { step: usize, period: usize, hops: usize },

    #[error("task set generation failed: {0}")]
    Generation(String),

    #[error("no end point candidate in [{lower}, {upper}]")]
    NoCandidate { lower: usize, upper: usize },

    #[error("candidate {candidate} infeasible: {reason}")]
    InfeasibleCandidate { candidate: usize, reason: String },

    #[error("rhythmic demand cannot be covered: {0}")]
    Unsatisfiable(String),

    #[error("no feasible dynamic schedule for any of {tried} candidates")]
    DisturbanceInfeasible { tried: usize },

    #[error("static schedule infeasible: task {task} packet {packet} misses its deadline")]
    StaticInfeasible { task: TaskId, packet: usize },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("priority level {level} out of range (capacity {capacity})")]
    PriorityRange { level: u32, capacity: u32 },

    #[error("set cover instance invalid: {0}")]
    SetCover(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
