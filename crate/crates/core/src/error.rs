use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),

    #[error(
        "vertices {from} and {to} are not connected within the sealed ball of radius {radius}"
    )]
    BallTooSmall {
        from: VertexId,
        to: VertexId,
        radius: u32,
    },

    #[error("ball of radius {radius} exceeds the vertex limit: {count} > {limit}")]
    SizeLimit {
        radius: u32,
        count: usize,
        limit: usize,
    },

    #[error("walks of length {needed} need a ball of radius {needed}, sealed radius is {radius}")]
    RadiusTooSmall { needed: usize, radius: u32 },

    #[error("invalid descriptor `{input}`: {reason}")]
    Descriptor { input: String, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step to {to} is not incident to the current endpoint {from}")]
    NonIncident { from: VertexId, to: VertexId },

    #[error("series diverges at z = {z}: singularity at {singularity}")]
    Divergent { z: f64, singularity: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("walk length {n} is beyond exact reach ({limit}); use the rosenbluth sampler")]
    ExactOutOfReach { n: usize, limit: usize },

    #[error("table format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn descriptor(input: &str, reason: impl Into<String>) -> Self {
        Error::Descriptor {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
