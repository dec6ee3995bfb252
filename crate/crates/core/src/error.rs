use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty point list")]
    EmptyPointList,
    #[error("point {0:?} lies outside the ambient domain [0,1)^d")]
    OutsideAmbient(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("depth {depth} too large for dimension {dim} (d * depth must be at most 63)")]
    DepthTooLargeForDim { depth: u32, dim: usize },
    #[error("invalid cube: {0}")]
    InvalidCube(String),
    #[error("resolution exceeded: requested depth {requested}, set depth {available}")]
    ResolutionExceeded { requested: u32, available: u32 },
    #[error("window too small: [{lo}, {hi}]")]
    WindowTooSmall { lo: u32, hi: u32 },
    #[error("invalid exponent/depth: {0}")]
    InvalidQuery(String),
    #[error("u not on face grid: {0}")]
    UNotOnFaceGrid(String),
    #[error("no trimming needed: value {value} already within threshold {threshold}")]
    NoTrimmingNeeded { value: f64, threshold: f64 },
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("invalid alpha list: {0}")]
    InvalidAlphas(String),
    #[error("lambda out of range: {0}")]
    LambdaOutOfRange(f64),
    #[error("alpha out of range: {alpha} not in (0, {s})")]
    AlphaOutOfRange { alpha: f64, s: f64 },
    #[error("not a probability vector: {0}")]
    NotProbabilityVector(String),
    #[error("invalid ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("code too short: length {n} < alphabet size {m}")]
    CodeTooShort { n: usize, m: usize },
    #[error("depth too large for ratios: {0}")]
    ExpansionBudget(String),
    #[error("not a probability measure: total mass {0}")]
    NotProbabilityMeasure(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid blend weight {0}")]
    InvalidBlendWeight(f64),
    #[error("empty measure list")]
    EmptyMixture,
    #[error("empty target")]
    EmptyTarget,
    #[error("target set is not contained in K")]
    TargetNotInK,
    #[error("cover budget unreachable at n={n}: best value {value} exceeds 2^-(n+1) = {budget}")]
    BudgetUnreachable { n: usize, value: f64, budget: f64 },
    #[error("invalid spray parameters: {0}")]
    InvalidSpray(String),
    #[error("insufficient local box dimension for spray around atom {atom}: packed {packed} of {requested} points")]
    SprayPacking {
        atom: usize,
        packed: usize,
        requested: usize,
    },
    #[error("empty radius interval (1/{m}, 1/{l})")]
    EmptyRadiusInterval { l: u64, m: u64 },
    #[error("not probability measures: total masses {0} and {1}")]
    NotProbabilityMeasures(f64, f64),
    #[error("merged support of {0} points exceeds the LP cap of {1}")]
    SupportTooLarge(usize, usize),
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// Whether the failure comes from a numeric limit of a construction (as
    /// opposed to malformed input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::BudgetUnreachable { .. }
                | Error::SprayPacking { .. }
                | Error::ExpansionBudget(_)
                | Error::SupportTooLarge(..)
                | Error::LinearProgram(_)
        )
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
