use thiserror::Error;

/// Errors raised by the model, solvers, and measurement routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IddmError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("effective cavity frequency f1 = omega + xi1*delta = {f1} is not positive")]
    NonPositiveF1 { f1: f64 },

    #[error("impurity detuning delta_q must be nonzero")]
    ZeroDetuning,

    #[error("mean-field analysis requires chi = 0 (got {chi})")]
    ChiUnsupported { chi: f64 },

    #[error("beta = {beta} lies outside the domain |beta| <= 1")]
    DomainError { beta: f64 },

    #[error("nu = {nu} <= -1: equilibrium leaves the Holstein-Primakoff domain")]
    UnboundedPhase { nu: f64 },

    #[error("kappa = 0: the impurity population does not drive a transition")]
    ZeroKappa,

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("equilibrium is unstable: minimum Hessian eigenvalue {min_eigenvalue}")]
    UnstableEquilibrium { min_eigenvalue: f64 },

    #[error("Hilbert-space dimension {dim} exceeds the configured cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("measurement outcome has probability {probability}, cannot renormalize")]
    ZeroProbabilityOutcome { probability: f64 },

    #[error("target population {target} is unreachable with Werner parameter z = {z}")]
    Unreachable { z: f64, target: f64 },

    #[error("at {parameter} = {value}: {source}")]
    AtGridPoint {
        parameter: &'static str,
        value: f64,
        #[source]
        source: Box<IddmError>,
    },
}

impl IddmError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        IddmError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error (or the error wrapped at a grid point) is a solver failure.
    pub fn is_convergence_failure(&self) -> bool {
        match self {
            IddmError::ConvergenceFailure(_) => true,
            IddmError::AtGridPoint { source, .. } => source.is_convergence_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, IddmError>;
