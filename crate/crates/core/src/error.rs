use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("circuit already contains noise instructions")]
    AlreadyNoisy,

    #[error("detector {0} is not deterministic in the noiseless circuit")]
    NonDeterministicDetector(usize),

    #[error("observable {0} is not deterministic in the noiseless circuit")]
    NonDeterministicObservable(usize),

    #[error("insertion position {position} is outside the circuit (length {len})")]
    InvalidPosition { position: usize, len: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("syndrome is not in the column space of the check matrix")]
    InfeasibleSyndrome,

    #[error("mechanism {mechanism} flips {count} detectors; matching needs at most 2 (use BP instead)")]
    NotMatchable { mechanism: usize, count: usize },

    #[error("defect {0} cannot be matched: no path to another defect or the boundary")]
    Unmatchable(usize),

    #[error("brute-force decoding supports at most {max} variables, got {got}")]
    TooManyVariables { got: usize, max: usize },

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{context}: {msg}")]
    Io { context: String, msg: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            msg: err.to_string(),
        }
    }
}
