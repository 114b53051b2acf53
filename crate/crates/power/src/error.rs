use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] itflow::Error),
    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("Newton Jacobian is singular (reciprocal condition {rcond:.3e})")]
    SingularJacobian { rcond: f64 },
    #[error("equilibrium branch terminated at parameter {param}")]
    BranchTerminated { param: f64 },
    #[error("network is disconnected: bus {bus} is not reachable from bus {root}")]
    DisconnectedNetwork { bus: usize, root: usize },
    #[error("power flow diverged after {iterations} iterations (mismatch {mismatch:.3e})")]
    PowerFlowDivergence { iterations: usize, mismatch: f64 },
    #[error("power flow is inconsistent with the machine model (residual {residual:.3e})")]
    InconsistentPowerFlow { residual: f64 },
    #[error("algebraic Jacobian is singular (smallest singular value {sigma_min:.3e}, condition {condition:.3e})")]
    SingularAlgebraicJacobian { sigma_min: f64, condition: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid model: {0}")]
    Validation(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Numerics(e) => e.name(),
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::BranchTerminated { .. } => "BranchTerminated",
            Error::DisconnectedNetwork { .. } => "DisconnectedNetwork",
            Error::PowerFlowDivergence { .. } => "PowerFlowDivergence",
            Error::InconsistentPowerFlow { .. } => "InconsistentPowerFlow",
            Error::SingularAlgebraicJacobian { .. } => "SingularAlgebraicJacobian",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
        }
    }

    /// Input problems as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::DisconnectedNetwork { .. } => true,
            Error::Numerics(e) => matches!(
                e,
                itflow::Error::DimensionMismatch(_)
                    | itflow::Error::InvalidArgument(_)
                    | itflow::Error::InvalidPartition(_)
            ),
            _ => false,
        }
    }
}
