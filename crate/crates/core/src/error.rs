use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("unknown layer kind `{0}`")]
    UnknownLayerKind(String),

    #[error("shape mismatch at layer {layer}: {detail}")]
    ShapeMismatch { layer: usize, detail: String },

    #[error("non-positive dimension: {0}")]
    NonPositiveDimension(String),

    #[error("neuron model `{neuron}` is not valid in {mode} mode")]
    NeuronModeMismatch { neuron: String, mode: String },

    #[error("length mismatch: trace has {got} entries, network has {expected} layers")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative entry: {0}")]
    NegativeEntry(String),

    #[error("event-voxel encoding needs a measured input event count")]
    MissingInputEvents,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid technology profile: {0}")]
    InvalidProfile(String),

    #[error("non-positive memory size: {0} bytes")]
    NonPositiveSize(f64),

    #[error("inconsistent mode: counts are {counts}, sizing is {sizing}")]
    InconsistentMode { counts: String, sizing: String },

    #[error("SNN total energy is zero, ratio undefined")]
    ZeroSnnTotal,

    #[error("instance too large for the instrumented executor ({0} elements)")]
    InstanceTooLarge(u64),

    #[error("invalid spike placement: {0}")]
    InvalidPlacement(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}
