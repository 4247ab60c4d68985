use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by scale constructions, operators and certificates.
///
/// Rejections of a check are not errors: certificates report them as data.
/// Errors signal that a check could not be carried out as requested.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScError {
    #[error("level {level} out of range (max level {max})")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("truncation {0} is not on the ladder")]
    NotOnLadder(usize),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate basis: numerical rank {rank} below {expected}")]
    DegenerateBasis { rank: usize, expected: usize },
    #[error(
        "ambiguous numerical rank: singular value ratio {ratio:e} inside band [{lower:e}, {upper:e}]"
    )]
    AmbiguousRank { ratio: f64, lower: f64, upper: f64 },
    #[error("map evaluation failed: {0}")]
    Evaluation(String),
    #[error("finite differences unstable under step halving: {residuals:?}")]
    FdInstability { residuals: Vec<f64> },
    #[error("not a retraction: idempotency residual {residual:e} at sample {sample}")]
    NotARetraction { residual: f64, sample: usize },
    #[error("image leaves the target retract: residual {residual:e} at sample {sample}")]
    Containment { residual: f64, sample: usize },
    #[error("point not in quadrant: corner coordinate {coordinate} = {value}")]
    NotInQuadrant { coordinate: usize, value: f64 },
    #[error("not a diffeomorphism: inverse residual {residual:e} at sample {sample}")]
    NotADiffeo { residual: f64, sample: usize },
    #[error("parameter outside admissible domain: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("insufficient regularity: need level {required}, estimated {estimated}")]
    Level { required: f64, estimated: f64 },
    #[error("chart `{label}` failed: {reason}")]
    Chart { label: String, reason: String },
}

pub type Result<T> = core::result::Result<T, ScError>;
