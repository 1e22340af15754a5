//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while validating designs, deriving
/// protocol parameters, or running the exact linear algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // --- set-system validation ---
    #[error("block {block} is empty")]
    EmptyBlock { block: usize },
    #[error("block {block} equals the entire point set")]
    FullBlock { block: usize },
    #[error("block {block} references point {index}, but the system has {points} points")]
    IndexOutOfRange {
        block: usize,
        index: usize,
        points: usize,
    },
    #[error("block {block} contains point {index} more than once")]
    DuplicateIndexInBlock { block: usize, index: usize },
    #[error("point {point} occurs in no block")]
    UncoveredPoint { point: usize },
    #[error("no catalog entry named `{name}`")]
    UnknownName { name: String },
    #[error("deleting the point would leave block {block} empty")]
    WouldCreateEmptyBlock { block: usize },
    #[error("k must satisfy 1 <= k < v (got k={k}, v={v})")]
    InvalidK { k: usize, v: usize },

    // --- protocol parameter derivation ---
    #[error("the system is not an (r,lambda)-design")]
    NotPureDesign,
    #[error("degenerate design: {reason}")]
    DegenerateDesign { reason: String },
    #[error("privacy gap is not positive (alpha1 <= alpha2, i.e. p* <= q*)")]
    NonPositivePrivacyGap,
    #[error("gamma must be greater than 1")]
    GammaNotGreaterThanOne,
    #[error("theta must lie strictly between 0 and 1")]
    ThetaOutOfRange,
    #[error("parameters are inconsistent with the design: {reason}")]
    ParamMismatch { reason: String },

    // --- TPM verification ---
    #[error("column {col} sums to {sum}, not 1")]
    NotColumnStochastic { col: usize, sum: String },
    #[error("entry ({row},{col}) is negative")]
    NonPositiveEntry { row: usize, col: usize },
    #[error("entry ({row},{col}) is zero, so the privacy ratio is unbounded")]
    InfiniteRatio { row: usize, col: usize },
    #[error("x and x' must be distinct points")]
    SamePoint,

    // --- estimators / linear algebra ---
    #[error("estimator gap p* - q* is zero")]
    DegenerateGap,
    #[error("c = 0, so cI + dJ is singular")]
    SingularC,
    #[error("vd + c = 0, so cI + dJ is singular")]
    SingularSum,
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("induced probability of output {index} is zero")]
    ZeroInducedProbability { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the design is not a BIBD")]
    NotBIBD,

    // --- distributions, counts, simulation ---
    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },
    #[error("counts must sum to t (got sum {sum}, t {t})")]
    CountSumMismatch { sum: u64, t: u64 },
    #[error("sample count t must be at least 1")]
    InvalidSampleCount,
    #[error("rep count must be at least 2")]
    InvalidRepCount,

    // --- parsing ---
    #[error("cannot parse `{input}` as a rational number")]
    RationalParse { input: String },
}

pub type Result<T> = std::result::Result<T, Error>;
