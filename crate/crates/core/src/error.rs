use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-binary symbol {value} at position {index}")]
    NonBinary { index: usize, value: u8 },

    #[error("observation symbol {symbol} at position {index} outside alphabet of size {size}")]
    SymbolOutOfRange {
        index: usize,
        symbol: usize,
        size: usize,
    },

    #[error("prefix length {prefix} must be smaller than block length {n}")]
    PrefixLength { prefix: usize, n: usize },

    /// The joint weight at `index` vanished for both bit values, i.e. the
    /// observation has probability zero under the model.
    #[error("observation has zero probability under the model (index {index})")]
    Unnormalizable { index: usize },

    /// The encoder's fixed bits (message, frozen or relay) have probability
    /// zero given the state, so no codeword follows the model.
    #[error("fixed bits contradict the encoder model (index {index})")]
    EncodeInfeasible { index: usize },

    #[error("block length {0} too large for exhaustive enumeration")]
    TooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("model has no auxiliary functions p(v|s), x(v,s)")]
    MissingAux,

    #[error("message set is empty")]
    EmptyMessageSet,

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("unsupported profile version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed profile file {path}: {source}")]
    MalformedFile {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
