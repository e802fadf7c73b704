use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid background: {0}")]
    InvalidBackground(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("no node with id or label {0:?}")]
    UnknownNodeKey(String),

    #[error("unknown arc {0}")]
    UnknownArc(usize),

    #[error("arc {arc} has non-positive speed {speed} km/h")]
    NonPositiveSpeed { arc: usize, speed: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "state space has {size} states, above the limit of {limit}; \
         reduce the network or prune states first"
    )]
    StateSpaceTooLarge { size: f64, limit: usize },

    #[error("destination {destination} is unreachable from node {origin}")]
    Unreachable { origin: usize, destination: usize },

    #[error("duplicate rate {0} in hypoexponential sum; perturb the rates to make them distinct")]
    DuplicateRates(f64),

    #[error("policy is not admissible from node {node} in state {state}")]
    NotAdmissible { node: usize, state: usize },

    #[error("generator is reducible; no unique stationary distribution")]
    Reducible,

    #[error("route did not reach the destination within {0} decision epochs")]
    StepLimit(usize),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}
