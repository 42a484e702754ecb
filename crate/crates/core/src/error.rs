use thiserror::Error;

use crate::geometry::{LinkId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown link {0}")]
    UnknownLink(LinkId),

    #[error("link {link} has length {length} outside [{d_min}, {d_max}]")]
    LinkOutOfBounds {
        link: LinkId,
        length: f64,
        d_min: f64,
        d_max: f64,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("link {0} cannot meet the noise-only SINR requirement at the configured power")]
    InfeasibleLink(LinkId),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refusing exhaustive search over {m} links (limit {max_m})")]
    TooLarge { m: usize, max_m: usize },

    #[error("protocol violation at slot {slot} by node {node}: {reason}")]
    ProtocolViolation {
        slot: u64,
        node: NodeId,
        reason: String,
    },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}
