use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix exponential overflow (scaled norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("system is not stable (spectral radius {spectral_radius})")]
    UnstableSystem { spectral_radius: f64 },

    #[error("matrix is defective or too close to defective (eigenvector condition {condition:e})")]
    DefectiveMatrix { condition: f64 },

    #[error("conditioning block is singular")]
    SingularConditioningBlock,

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("function returned a non-finite value at probe {probe}")]
    NonFiniteEvaluation { probe: usize },

    #[error("target covariance block is singular")]
    SingularTargetCovariance,

    #[error("{which} log-determinant argument is not positive definite")]
    NonPdLogArgument { which: &'static str },

    #[error("modal projection basis is singular")]
    SingularEmbedding,

    #[error("eigenvalue computation did not converge")]
    EigenNoConvergence,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Overflow { .. } => "Overflow",
            Error::UnstableSystem { .. } => "UnstableSystem",
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::SingularConditioningBlock => "SingularConditioningBlock",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NonFiniteEvaluation { .. } => "NonFiniteEvaluation",
            Error::SingularTargetCovariance => "SingularTargetCovariance",
            Error::NonPdLogArgument { .. } => "NonPdLogArgument",
            Error::SingularEmbedding => "SingularEmbedding",
            Error::EigenNoConvergence => "EigenNoConvergence",
            Error::InvalidPartition(_) => "InvalidPartition",
        }
    }
}
