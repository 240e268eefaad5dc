use thiserror::Error;

/// Every failure the library reports. Variants carry the diagnostic a caller
/// needs to act on (required depth, offending gap, offending position, ...).
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{symbol}` at position {position}")]
    UnknownSymbol { position: usize, symbol: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation depth {actual} is insufficient, need at least {required}")]
    InsufficientDepth { required: u32, actual: u32 },

    #[error("element of length {length} is outside the built ball; rebuild with radius >= {required_radius}")]
    OutsideBall { length: usize, required_radius: usize },

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("matrix is singular")]
    Singular,

    #[error("U_{k} is ill-defined: relative gap mu_k/mu_(k+1) = {gap}")]
    IllDefinedSubspace { k: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("pencil condition number {cond:e} exceeds the limit")]
    IllConditioned { cond: f64 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("input is not nilpotent: {0}")]
    NotNilpotent(String),

    #[error("peripheral image is not weakly unipotent: {0}")]
    NotWeaklyUnipotent(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("transversality {value:e} below floor {floor:e} ({what})")]
    Transversality { value: f64, floor: f64, what: String },

    #[error("boundary flag did not converge; increments {increments:?}")]
    NonConvergent { increments: Vec<f64> },

    #[error("missing frame: {0}")]
    MissingFrame(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
