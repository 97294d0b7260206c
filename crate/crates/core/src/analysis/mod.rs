//! Closed-loop structure of the horizon-one scheme: per-mode matrices,
//! spectral certificates, step-size limits and constraint-free margins.

mod certificate;
mod closed_loop;
mod fit;
mod margins;
mod modes;

pub use certificate::{
    certify, certify_eigenvalues, h_max, CertifyOptions, ConvergenceCertificate, HMax, ModeCertificate, ZeroMode,
};
pub use closed_loop::{closed_loop_matrix, propagate_closed_loop, ClosedLoopTrace};
pub use fit::{fit_log_rate, max_pairwise_gap};
pub use margins::{feasibility_margins, FeasibilityMargins};
pub use modes::{mode_matrices, spectral_radius, ModeMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("disturbance decay rate must be positive, got {0}")]
    BadDecayRate(f64),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("unstable already at the smallest probe step {0}")]
    UnstableAtSmallestStep(f64),
    #[error("certificate is invalid: {0}")]
    InvalidCertificate(String),
    #[error("certificate carries no eigenvector norms; build it from a spectral decomposition")]
    MissingEigenvectors,
    #[error("{what} has length {got}, expected {want}")]
    Length {
        what: &'static str,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
}
