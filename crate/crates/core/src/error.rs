use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid waveguide specification: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid emitter position: {0}")]
    InvalidEmitter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no guided mode found (cutoff): {0}")]
    Cutoff(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("field at evaluation point is zero (|E| = {magnitude:.3e}); effective area undefined")]
    ZeroField { magnitude: f64 },

    #[error("dipole magnitude not specified; use the ratio-based coupling functions instead")]
    MissingDipoleMagnitude,

    #[error("simulation unstable at step {step}: field energy grew from {previous:.3e} to {current:.3e}")]
    Unstable {
        step: usize,
        previous: f64,
        current: f64,
    },

    #[error("invalid FDTD configuration: {0}")]
    InvalidFdtdConfig(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidGrid(_)
                | Error::InvalidEmitter(_)
                | Error::InvalidParameter(_)
                | Error::MissingDipoleMagnitude
                | Error::InvalidFdtdConfig(_)
                | Error::InvalidCircuit(_)
                | Error::Config(_)
        )
    }
}
