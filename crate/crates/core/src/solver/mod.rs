//! Closed-form horizon-one control law and the condensed local QP.

mod condense;
mod gains;
mod local;
mod qp;

pub use condense::{condense, CondensedQp, ConstraintKind, LinearConstraint};
pub use gains::{pace_only_control, solve_k1_unconstrained, GainPair};
pub use local::{solve_local, LocalSolution};
pub use qp::{solve_qp, QpSolution};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("weights and step must be positive, got w=({0}, {1}, {2}), h={3}")]
    NonPositiveInput(f64, f64, f64, f64),
    #[error("initial rate deviation {rate} lies outside [{min}, {max}]")]
    InfeasibleInitialRate { rate: f64, min: f64, max: f64 },
    #[error("active-set iteration cap {cap} reached; best iterate {best:?} has KKT residual {residual:e}")]
    IterationCap { cap: usize, best: Vec<f64>, residual: f64 },
    #[error("singular KKT system with {0} active constraints")]
    SingularKkt(usize),
}
