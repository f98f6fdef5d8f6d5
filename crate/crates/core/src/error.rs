use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(&'static str, &'static str),

    #[error("invalid letter {0:?} for a free group of rank {1}")]
    InvalidLetter(char, usize),

    #[error("word is not freely reduced: {0}")]
    Unreduced(String),

    #[error("plane point must have y > 0, got y = {0}")]
    OffPlane(f64),

    #[error("boundary points coincide; no connecting line")]
    SameEndpoints,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parameter {t} outside path domain [{lo}, {hi}]")]
    OutsideDomain { t: f64, lo: f64, hi: f64 },

    #[error("tree paths are evaluated at integer times only, got {0}")]
    NonIntegerTime(f64),

    #[error("numeric limit did not converge within horizon {horizon} (last change {last_change:e})")]
    NonConvergent { horizon: f64, last_change: f64 },

    #[error("series diverges: s = {s} is not above the critical exponent h = {h}")]
    Divergent { s: f64, h: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("operation not supported on the {0} backend")]
    Unsupported(&'static str),

    #[error("enumeration incomplete: {0}")]
    Incomplete(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
