use std::fmt;
use std::io;

use iddm::IddmError;

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_CONVERGENCE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(flag: &str, message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_INVALID,
            message: format!("{flag}: {message}"),
        }
    }

    pub fn convergence(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_CONVERGENCE,
            message: message.to_string(),
        }
    }
}

/// Flag (or flags) a user should change to clear a library error.
fn culprit(err: &IddmError) -> String {
    match err {
        IddmError::InvalidParameter { name, .. } => match *name {
            "n_atoms" => "--n".into(),
            "photon_cutoff" => "--cutoff".into(),
            "range" => "--from/--to".into(),
            "seed_count" => "--seeds".into(),
            other => format!("--{}", other.replace('_', "-")),
        },
        IddmError::NonPositiveF1 { .. } => "--omega/--xi1".into(),
        IddmError::ZeroDetuning => "--delta-q".into(),
        IddmError::ChiUnsupported { .. } => "--chi".into(),
        IddmError::DomainError { .. } => "--delta".into(),
        IddmError::UnboundedPhase { .. } => "--lambda/--kappa".into(),
        IddmError::ZeroKappa => "--kappa".into(),
        IddmError::UnstableEquilibrium { .. } => "--delta/--lambda".into(),
        IddmError::DimensionTooLarge { .. } => "--n/--cutoff/--max-dim".into(),
        IddmError::ZeroProbabilityOutcome { .. } => "--theta/--sign".into(),
        IddmError::Unreachable { .. } => "--target".into(),
        IddmError::AtGridPoint { parameter, .. } => format!("--{parameter}"),
        IddmError::ConvergenceFailure(_) => String::new(),
    }
}

impl From<IddmError> for CliError {
    fn from(err: IddmError) -> Self {
        if err.is_convergence_failure() {
            Self::convergence(err)
        } else {
            Self::invalid(&culprit(&err), err)
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        Self::invalid("--output", err)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let conv = CliError::from(IddmError::ConvergenceFailure("stalled".into()));
        assert_eq!(conv.code, EXIT_CONVERGENCE);
        let nested = CliError::from(IddmError::AtGridPoint {
            parameter: "delta",
            value: 0.5,
            source: Box::new(IddmError::ConvergenceFailure("stalled".into())),
        });
        assert_eq!(nested.code, EXIT_CONVERGENCE);
        let bad = CliError::from(IddmError::ZeroKappa);
        assert_eq!(bad.code, EXIT_INVALID);
        assert!(bad.message.starts_with("--kappa:"));
    }

    #[test]
    fn invalid_parameter_names_its_flag() {
        let err = CliError::from(IddmError::InvalidParameter {
            name: "omega_q_prime",
            reason: "not finite".into(),
        });
        assert!(err.message.starts_with("--omega-q-prime:"));
        let err = CliError::from(IddmError::InvalidParameter {
            name: "n_atoms",
            reason: "must be at least 1".into(),
        });
        assert!(err.message.starts_with("--n:"));
    }
}
