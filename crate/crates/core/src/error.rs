use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid trace {trace}: {reason}")]
    InvalidTrace { trace: f64, reason: &'static str },

    #[error("operator has zero trace")]
    ZeroTrace,

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("POVM elements sum to identity only within {residual:.3e}")]
    IncompletePovm { residual: f64 },

    #[error("Kraus operators violate sum A^dag A <= I (excess {excess:.3e})")]
    NotTraceNonIncreasing { excess: f64 },

    #[error("informationally incomplete design: rank {rank} < {required}")]
    InformationallyIncomplete { rank: usize, required: usize },

    #[error("input state has a vanishing Schmidt coefficient ({coefficient:.3e})")]
    DegenerateInput { coefficient: f64 },

    #[error("negative probability {0:.3e}")]
    NegativeProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown target `{0}`")]
    UnknownTarget(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("slope fit needs at least 3 usable rows, found {0}")]
    InsufficientFitRows(usize),

    #[error("{excluded} of {total} trials failed at N = {n}")]
    TooManyExclusions {
        n: u64,
        excluded: usize,
        total: usize,
    },

    #[error("malformed results file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
