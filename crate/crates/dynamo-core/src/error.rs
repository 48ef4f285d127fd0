use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid {nx}x{ny}x{nz}: axes must be even and at least 4")]
    InvalidGrid { nx: usize, ny: usize, nz: usize },

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("grid {nx}x{ny}x{nz} under-resolves frequency {freq} (need at least {}, 3x margin)", 3 * freq)]
    UnderResolved { nx: usize, ny: usize, nz: usize, freq: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside schedule horizon [0, {horizon})")]
    OutOfSchedule { t: f64, horizon: f64 },

    #[error("corrector iteration did not converge after {iterations} sweeps (last increment {increment:.3e}); amplitude too large for the discrete contraction")]
    CorrectorDiverged { iterations: usize, increment: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("contour passes within {dist:.3e} of an eigenvalue (minimum allowed 1e-8)")]
    ContourTooClose { dist: f64 },

    #[error("not enough samples in window: found {found}, need at least {need}")]
    TooFewSamples { found: usize, need: usize },

    #[error("no history sample at checkpoint t={0}")]
    MissingCheckpoint(f64),

    #[error("monodromy dimension {dim} exceeds the cost guard of {max}")]
    MonodromyTooLarge { dim: usize, max: usize },

    #[error("bad checkpoint file: {0}")]
    BadCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
