//! Distributed model-predictive time coordination of agents that follow
//! pre-assigned paths parameterized by a virtual time.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod graph;
pub mod mission;
pub mod mpc;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod solver;

pub use scalar::Real;

pub type Weights = mpc::Weights<f64>;
pub type MpcConfig = mpc::MpcConfig<f64>;
pub type AgentState = mpc::AgentState<f64>;
pub type GammaBounds = mission::GammaBounds<f64>;
pub type PhysicalBounds = mission::PhysicalBounds<f64>;
pub type DesiredTrajectory = mission::DesiredTrajectory<f64>;
pub type SpectralDecomposition = graph::SpectralDecomposition<f64>;
pub type GainPair = solver::GainPair<f64>;
pub type ConvergenceCertificate = analysis::ConvergenceCertificate<f64>;
pub type FeasibilityMargins = analysis::FeasibilityMargins<f64>;
