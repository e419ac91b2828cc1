use thiserror::Error;

/// Errors raised by the identification and generation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch {
        axis: String,
        expected: usize,
        found: usize,
    },

    #[error("label mismatch on {axis}: {left:?} vs {right:?}")]
    LabelMismatch {
        axis: String,
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("duplicate {axis} label {label:?}")]
    DuplicateLabel { axis: String, label: String },

    #[error("invalid tolerance {name} = {value} (must be strictly positive and finite)")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("regularizer is not symmetric positive definite: {0}")]
    InvalidRegularizer(String),

    #[error("ridge parameter must be positive, got {0}")]
    InvalidLambda(f64),

    #[error(
        "belief matrix has rank {rank} < {columns} columns; \
         remove dependent states or use the underdetermined path"
    )]
    RankDeficient { rank: usize, columns: usize },

    #[error(
        "more states ({states}) than signals ({signals}); \
         regression does not identify the structure, use the ridge path"
    )]
    Underdetermined { states: usize, signals: usize },

    #[error("no eigenvalue-1 eigenvector found; the landscape was not generated by the model")]
    NotModelGenerated,

    #[error("prior is not a nonnegative combination of belief rows (residual {residual:e})")]
    NotInHull { residual: f64 },

    #[error("state {state:?} is linearly dependent but not a nonnegative combination of retained states")]
    NotConvexDependent { state: String },

    #[error(
        "structure assigns zero probability to signal {signal:?} in state {state:?} but the belief there is positive"
    )]
    DivisionByZeroStructure { signal: String, state: String },

    #[error("regressed structure has negative entry {value:e} at state {state:?}, signal {signal:?}")]
    NegativeStructure { state: String, signal: String, value: f64 },

    #[error("hypothetical beliefs are not reproduced by any structure on these states (residual {residual:e})")]
    NotRationalizable { residual: f64 },

    #[error("inconsistent landscape: {0}")]
    InconsistentLandscape(String),

    #[error("every signal has zero marginal probability")]
    AllSignalsDropped,

    #[error("linear program failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
