use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cone is not pointed (contains a line)")]
    NotPointed,
    #[error("cone is not generating (generators span {rank} of {dim} dimensions)")]
    NotGenerating { rank: usize, dim: usize },
    #[error("empty generator list")]
    Empty,
    #[error("mixed polyhedral/psd cones are not supported in exact operations")]
    MixedKindUnsupported,
    #[error("spatial composite requires two quantum (psd) systems")]
    KindMismatch,
    #[error("operation {0} is not available for psd models; verify a supplied candidate instead")]
    UnsupportedKind(&'static str),
    #[error("map is not a morphism of COMs")]
    NotAMorphism,
    #[error("zero map cannot be normalized")]
    ZeroMap,
    #[error("bilinear form is not a non-signaling state: {0}")]
    NotNonsignalingState(String),
    #[error("conditioning on an effect with zero probability")]
    ZeroProbabilityCondition,
    #[error("remote evaluation sides disagree (max-abs difference {0:e})")]
    RemoteEvalMismatch(f64),
    #[error("compact structure does not satisfy the snake equations (residual {0:e})")]
    InvalidStructure(f64),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("degenerate Mackey triple: {0}")]
    DegenerateTriple(String),
    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T, E = ComError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(ComError::DimensionMismatch { expected, got })
    }
}
