use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid cantor spec: {0}")]
    InvalidCantorSpec(String),

    #[error("dyadic level overflow: level {attempted} exceeds cap {cap}; achieved prefix {achieved:?}")]
    GridOverflow {
        attempted: u32,
        cap: u32,
        achieved: Vec<u64>,
    },

    #[error("integer search stalled above {limit} after prefix {achieved:?}")]
    SearchStall { limit: u64, achieved: Vec<u64> },

    #[error("schedule is not monotone: w_{index} = {lower} < w_{next} = {upper}", next = .index + 1)]
    NonMonotone { index: usize, lower: f64, upper: f64 },

    #[error("schedule too short: need {needed} levels, have {have}")]
    ScheduleTooShort { needed: usize, have: usize },

    #[error("|z| = {modulus} is closer to the boundary than the guard 1 - 1e-9")]
    BoundaryGuard { modulus: f64 },

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
