//! Information transfer between subspaces of stochastic linear systems, with
//! the numerical kernels it rests on and classical participation factors for
//! comparison.

pub mod error;
pub mod lti;
pub mod models;
pub mod numerics;
pub mod participation;
pub mod transfer;

pub use error::{Error, Result};
pub use lti::{
    default_labels, discretize, is_stable, propagate_covariance, steady_state_covariance,
    ContinuousLti, CovarianceTrajectory, DiscreteLti, Stability,
};
pub use participation::{participation_matrix, ParticipationMatrix};
pub use transfer::{
    monte_carlo_transfer_oracle, one_step_transfer, steady_state_transfer, transfer_matrix,
    transfer_matrix_at, transfer_series, transfer_to_mode, transfer_to_target, GroupSpec,
    ModalTarget, SubspacePartition, TimeIndex, TransferMatrix, TransferResult, Units,
};
