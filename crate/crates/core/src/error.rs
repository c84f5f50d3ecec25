use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bracket dimension must be a positive even integer, got {0}")]
    OddDimension(usize),

    #[error("matrix is singular")]
    Singular,

    #[error("invalid complex structure: {0}")]
    InvalidComplexStructure(String),

    #[error("two-form is not of type (1,1): anti-invariant part has size {0:e}")]
    NotOneOne(f64),

    #[error("bracket is zero")]
    ZeroBracket,

    #[error("bracket is not 2-step nilpotent (residual {0:e})")]
    NotTwoStep(f64),

    #[error("complex structure does not preserve the center")]
    CenterNotInvariant,

    #[error("almost-abelian data is not SKT (lemma residual {lemma:e}, spectral defect {spectral:e})")]
    NotSkt { lemma: f64, spectral: f64 },

    #[error("bracket is not pluriclosed (largest dc coefficient {0:e})")]
    NotPluriclosed(f64),

    #[error("SKT criteria disagree: {0}")]
    CriteriaDisagree(String),

    #[error("invalid almost-abelian data: {0}")]
    InvalidData(String),

    #[error("initial condition is nilpotent ((a, A) = (0, 0)); use the nilpotent flow")]
    NilpotentInput,

    #[error("maximum number of steps ({0}) exceeded at t = {1}")]
    MaxSteps(usize, f64),

    #[error("eigensolver failed to converge")]
    Eigensolver,

    #[error("invalid bracket entry ({i}, {j}, {k}): {reason}")]
    InvalidEntry {
        i: usize,
        j: usize,
        k: usize,
        reason: &'static str,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
