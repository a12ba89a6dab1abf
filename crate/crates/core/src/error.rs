use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular configuration: particles {0} and {1} have coincident centers")]
    CoincidentCenters(usize, usize),

    #[error("particle {0} crossed a rigid wall")]
    WallPenetration(usize),

    #[error("FIRE did not converge after {iterations} iterations (residual force {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("simulation blew up at step {step}: particle {particle} displaced by {displacement:e}")]
    BlowUp {
        step: usize,
        particle: usize,
        displacement: f64,
    },

    #[error("unstable packing: Hessian eigenvalue {0:e} is negative")]
    UnstablePacking(f64),

    #[error("analysis window of {samples} samples is shorter than one period at f = {frequency}")]
    WindowTooShort { samples: usize, frequency: f64 },

    #[error("signal has zero power; cannot add noise at a finite SNR")]
    ZeroPowerSignal,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
