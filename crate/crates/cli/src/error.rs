use std::process::ExitCode;

use ptho_core::blocks::BlockError;
use ptho_core::exact::ParamError;
use ptho_core::metric::MetricError;
use ptho_core::numgrid::eigen::EigenError;
use ptho_core::numgrid::GridError;

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Parameters rejected before any computation (exit 2).
    #[error("invalid input: {0}")]
    Validation(String),
    /// Eigensolver, root finder or integrator failure (exit 3).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A verification threshold was violated (exit 4).
    #[error("threshold violated: {0}")]
    Threshold(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Threshold(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_exit_code(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EigenError> for CliError {
    fn from(e: EigenError) -> Self {
        match e {
            EigenError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Eigen(inner) => CliError::Numerical(inner.to_string()),
            GridError::InverseIteration(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BlockError> for CliError {
    fn from(e: BlockError) -> Self {
        match e {
            BlockError::NoBlocks
            | BlockError::NotSquare { .. }
            | BlockError::InvalidTolerance(_)
            | BlockError::TooManyEnergies { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Infeasible { .. }
            | MetricError::SingularOmega
            | MetricError::StepRejected { .. }
            | MetricError::NotPositiveDefinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
