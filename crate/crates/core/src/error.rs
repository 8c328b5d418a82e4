use thiserror::Error;

use crate::model::{DestId, PacketId};

#[derive(Debug, Error)]
pub enum RsncError {
    #[error("packet {packet} is not wanted by destination {dest}")]
    NotWanted { dest: DestId, packet: PacketId },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid transmission: {0}")]
    InvalidTransmission(String),

    #[error("vertex set is not a clique: {0}")]
    NotAClique(String),

    #[error("empty coding graph")]
    EmptyGraph,

    #[error("f and l overlap on {0} request(s)")]
    OverlappingSets(usize),

    #[error("graph has {vertices} vertices, enumeration cap is {cap}")]
    EnumerationCap { vertices: usize, cap: usize },

    #[error("oracle limit exceeded: {vertices} vertices > {max}")]
    OracleLimit { vertices: usize, max: usize },

    #[error("log does not match scenario: {0}")]
    LogMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unsupported document version {found:?}, expected {expected:?}")]
    Version { found: String, expected: &'static str },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RsncError>;
