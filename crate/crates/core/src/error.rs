use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k exceeds n (k={k}, n={n})")]
    KExceedsN { k: u32, n: u32 },
    #[error("invalid uniformity k={0}; need k >= 2")]
    InvalidUniformity(u32),
    #[error("invalid root cardinality r={r}; need 1 <= r <= k-1 (k={k})")]
    InvalidRootSize { r: u32, k: u32 },
    #[error("lambda must be non-negative and finite, got {0}")]
    InvalidLambda(f64),
    #[error("lambda={lambda} exceeds C(n-r,k-r)={trials}; p would exceed 1")]
    LambdaTooLarge { lambda: f64, trials: u128 },
    #[error("probability must lie in [0,1], got {0}")]
    InvalidProbability(f64),
    #[error("binomial coefficient C({n},{k}) overflows 128 bits")]
    BinomialOverflow { n: u64, k: u64 },
    #[error("invalid hyperedge {edge:?}: {reason}")]
    InvalidEdge { edge: Vec<u32>, reason: &'static str },
    #[error("invalid r-set {0:?}")]
    InvalidRSet(Vec<u32>),
    #[error("block size d={d} does not match C(k,r)-1 for k={k}, r={r}")]
    BlockSizeMismatch { d: u32, k: u32, r: u32 },
    #[error("invalid Galton-Watson parameters: {0}")]
    InvalidGwParams(String),
    #[error("expected tree size {expected:.3e} exceeds cap {cap:.3e}")]
    ExpectedSizeCap { expected: f64, cap: f64 },
    #[error("graph with {size} vertices exceeds the canonicalization cap {cap}")]
    CanonicalSizeCap { size: usize, cap: usize },
    #[error("canonical search exceeded {0} leaves")]
    CanonicalSearchBudget(u64),
    #[error("matrix dimension {dim} exceeds dense cap {cap}")]
    DenseCap { dim: u64, cap: u64 },
    #[error("QL iteration did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("edge functional returned an invalid value {value} on ({u}, {v})")]
    NegativeFunctional { u: usize, v: usize, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
