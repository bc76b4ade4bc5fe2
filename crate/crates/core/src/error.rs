use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("table has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` already exists")]
    NameCollision(String),
    #[error("variable `{0}` listed twice")]
    DuplicateVariable(String),
    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("alphabet of `{0}` must have at least one symbol")]
    EmptyAlphabet(String),
    #[error("invalid distortion measure: {0}")]
    InvalidDistortion(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("channel does not factorize into orthogonal links (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("correlation {0} is degenerate (|rho| must be < 1)")]
    DegenerateRho(f64),
    #[error("source {source_index} symbol {symbol} has no mixture")]
    SymbolNotCovered { source_index: usize, symbol: usize },
    #[error("zero-variance components make a required integral singular")]
    ZeroVarianceComponent,
    #[error("optimizer found no feasible point across {starts} starts")]
    OptimizerDiverged { starts: usize },
    #[error("codebook of {count} codewords exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("io: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
