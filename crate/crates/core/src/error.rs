use thiserror::Error;

use crate::topology::NodeId;

/// Errors produced by the analysis engine, routing and configuration layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("node {0} does not exist in the topology")]
    UnknownNode(NodeId),

    #[error("ONU index {onu} out of range 1..={onus}")]
    OnuOutOfRange { onu: usize, onus: usize },

    #[error("invalid frame length distribution: {0}")]
    Distribution(String),

    #[error("invalid traffic scenario: {0}")]
    Scenario(String),

    #[error("no route from node {src} to node {dst}")]
    Unreachable { src: NodeId, dst: NodeId },

    #[error("frame of {frame_bits} bits plus overhead exceeds the aggregate limit of {max_bits} bits")]
    FrameTooLarge { frame_bits: u64, max_bits: u64 },

    #[error("queue saturated at intensity {rho} (must be < 1)")]
    Saturated { rho: f64 },

    #[error("service time diverges for retry probability {0}")]
    Divergent(f64),

    #[error("DCF fixed point did not converge in zone {zone} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        zone: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
