use thiserror::Error;

/// Errors raised across the crate. Contract violations map to CLI exit
/// code 2, numerical-indeterminacy conditions to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("singular or ill-conditioned matrix (rcond estimate {rcond:.3e})")]
    SingularMatrix { rcond: f64 },

    #[error("integration stalled at x = {x:.6e} (step size underflow)")]
    IntegrationStall { x: f64 },

    #[error("eigenvalue-track matching ambiguous near x = {x:.6e} (overlap {overlap:.3}); refine the probe plan")]
    TrackingAmbiguity { x: f64, overlap: f64 },

    #[error("indeterminate limit for track {track}: last value {value:.6e}, relative variation {variation:.3e}")]
    IndeterminateLimit {
        track: usize,
        value: f64,
        variation: f64,
    },

    #[error("frame construction failed: annihilation residual {residual:.3e} above tolerance")]
    FrameConstruction { residual: f64 },

    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),

    #[error("refinement needed: {0}")]
    RefinementNeeded(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code for this error per the command contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) | Error::SingularMatrix { .. } | Error::Config(_) => 2,
            Error::IntegrationStall { .. }
            | Error::TrackingAmbiguity { .. }
            | Error::IndeterminateLimit { .. }
            | Error::FrameConstruction { .. }
            | Error::Inconsistency(_)
            | Error::RefinementNeeded(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
