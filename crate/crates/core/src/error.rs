use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension d must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("per-axis lattice range M must be at least 1 (N = {0} gives M = 0)")]
    BoxTooSmall(f64),
    #[error("scaling parameter N must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("interval length sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("rotation vector has length {got}, expected d-1 = {expected}")]
    AlphaLength { got: usize, expected: usize },
    #[error("rotation coordinate {0} outside [0,1)")]
    AlphaRange(f64),
    #[error("interval list is empty")]
    NoIntervals,
    #[error("unknown center symbol {0:?}")]
    UnknownSymbol(String),
    #[error("unknown irrational tag {0:?}")]
    UnknownIrrational(String),
    #[error("center is not rational: {0}")]
    NotRational(String),
    #[error("unknown sampling law {0:?}")]
    UnknownLaw(String),
    #[error("invalid sampling law {name:?}: {reason}")]
    BadLaw { name: String, reason: String },
    #[error("config field {field:?}: {reason}")]
    BadConfig { field: &'static str, reason: String },
    #[error("histogram is empty (no samples)")]
    EmptyHistogram,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(u64),
    #[error("histogram component {0} out of range")]
    BadComponent(usize),
    #[error("reference pmf dimension {ref_dims} does not match histogram dimension {hist_dims}")]
    DimsMismatch { ref_dims: usize, hist_dims: usize },
    #[error("scan grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("moment query is empty")]
    EmptyQuery,
    #[error("moment query has {0} entries, cap is 12 (Bell numbers blow up past that)")]
    QueryTooLarge(usize),
    #[error("moment order must not be all zero")]
    ZeroOrder,
    #[error("rational interval has nonpositive length")]
    EmptyRationalInterval,
    #[error("phi_k argument n must be positive")]
    PhiZero,
    #[error("brute-force enumeration too large: n^k = {0:.3e} exceeds 1e8")]
    BruteForceTooLarge(f64),
    #[error("zeta ratio check needs d - k >= 2, got k = {k}, d = {d}")]
    ZetaRange { k: u32, d: u32 },
    #[error("zeta ratio gap exceeded: |{partial} - {target}| > {gap_bound}")]
    ZetaGapExceeded {
        partial: f64,
        target: f64,
        gap_bound: f64,
    },
    #[error("matrix columns are linearly dependent")]
    RankDeficient,
    #[error("column decomposition needs r < d, got r = {r}, d = {d}")]
    TooManyColumns { r: usize, d: usize },
    #[error("matrix shape invalid: {0}")]
    BadMatrix(String),
    #[error("lengths mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sigma must be positive, got {0}")]
    NonPositivePoissonParam(f64),
    #[error("overflow in exact integer arithmetic")]
    IntegerOverflow,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
