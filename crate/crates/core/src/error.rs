use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),

    #[error("invalid symbol table: {0}")]
    InvalidTable(String),

    #[error("ambiguous decode: tolerance {tol} admits more than one symbol (minimum code distance {min_distance})")]
    AmbiguousDecode { tol: f64, min_distance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{neurons} neurons cannot be split evenly over {channels} input channels")]
    Divisibility { neurons: usize, channels: usize },

    #[error("malformed rule {rule}: pops {pops} symbols from a stack of height {height}")]
    MalformedRule { rule: usize, pops: usize, height: usize },

    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("pop underflow at step {step}: popping {pops} from a stack of height {height}")]
    PopUnderflow { step: usize, pops: usize, height: usize },

    #[error("inner loop exceeded {limit} iterations at step {step}")]
    RunawayLoop { step: usize, limit: usize },

    #[error("annotation is malformed: {0}")]
    MalformedAnnotation(String),

    #[error("training data has zero variance")]
    ZeroVariance,

    #[error("empty training data")]
    EmptyData,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sampling exhausted after {draws} rejected draws (window [{min_len}, {max_len}])")]
    SamplingExhausted {
        draws: usize,
        min_len: usize,
        max_len: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
