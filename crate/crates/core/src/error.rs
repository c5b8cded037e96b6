use thiserror::Error;

/// Every failure the engine can report.
///
/// The variants split into three groups that the CLI maps onto exit codes:
/// input problems, certification problems (`Inconclusive`, `NotStabilized`,
/// `PrecisionTooLow`, `WindowExceeded`, `InfiniteLength`) and genuine mathematical failures
/// (`Failed`).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MflabError {
    #[error("operands live over different rings: {0}")]
    MismatchedRing(String),
    #[error("series is not a unit (constant term is zero)")]
    NotAUnit,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("characteristic 2 is not supported here")]
    CharTwo,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("not a matrix factorization: {which} differs from f*I at entry ({row}, {col})")]
    NotAFactorization { which: String, row: usize, col: usize },
    #[error("matrix factorization is not reduced")]
    NotReduced,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("ring is not a double branched cover: {0}")]
    NotACover(String),
    #[error("value not stabilized: {value_low} at trunc {trunc} vs {value_high} at trunc {}; retry with --trunc {suggested}", trunc + 2)]
    NotStabilized {
        trunc: usize,
        value_low: usize,
        value_high: usize,
        suggested: usize,
    },
    #[error(
        "entries of degree {max_degree} exceed the comparison cutoff at trunc {trunc}; retry with --trunc {suggested}"
    )]
    PrecisionTooLow {
        trunc: usize,
        max_degree: usize,
        suggested: usize,
    },
    #[error("resolution window exceeded: step {requested} requested, certified up to step {safe}")]
    WindowExceeded { requested: usize, safe: usize },
    #[error("approximation construction supports dimension <= 2, got {0}")]
    DimensionUnsupported(usize),
    #[error("ring is not Gorenstein: {0}")]
    NotGorenstein(String),
    #[error("length grows with the truncation (non-isolated singularity?): {0:?}")]
    InfiniteLength(Vec<usize>),
    #[error("operation requires a finite prime field")]
    RequiresFiniteField,
    #[error("dim_k D = {0} < 3: 1, alpha, gamma cannot be linearly independent")]
    DTooSmall(usize),
    #[error("element is not faithful for module {0}")]
    NotFaithful(String),
    #[error("no u +/- phi normal form found")]
    NoNormalForm,
    #[error("identity failed: {0}")]
    Failed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("computation cancelled")]
    Cancelled,
}

pub type Result<T> = std::result::Result<T, MflabError>;
