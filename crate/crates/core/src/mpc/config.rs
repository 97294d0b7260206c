use thiserror::Error;

use crate::mission::GammaBounds;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("weights must be positive, got ({0}, {1}, {2})")]
    NonPositiveWeight(f64, f64, f64),
    #[error("prediction horizon must be at least 1")]
    ZeroHorizon,
    #[error("sampling period must be positive, got {0}")]
    BadStep(f64),
    #[error("correction parameters beta={0} and delta={1} must be positive")]
    BadAlpha(f64, f64),
    #[error("priority weights must be mutually distinct; psi[{0}] == psi[{1}]")]
    DuplicatePriority(usize, usize),
    #[error("priority vector has {got} entries for {agents} agents")]
    PriorityLength { got: usize, agents: usize },
    #[error("corridor window [{0}, {1}] is empty")]
    EmptyWindow(f64, f64),
    #[error("tie tolerance must be non-negative, got {0}")]
    NegativeTieTolerance(f64),
}

/// Weights `(w₁, w₂, w₃)` on coordination, pace keeping and control effort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<T: Real> {
    pub coordination: T,
    pub pace: T,
    pub effort: T,
}

impl<T: Real> Weights<T> {
    pub fn new(coordination: T, pace: T, effort: T) -> Self {
        Self {
            coordination,
            pace,
            effort,
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::new(self.coordination * c, self.pace * c, self.effort * c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.coordination > T::zero() && self.pace > T::zero() && self.effort > T::zero() {
            Ok(())
        } else {
            Err(ConfigError::NonPositiveWeight(
                self.coordination.as_f64(),
                self.pace.as_f64(),
                self.effort.as_f64(),
            ))
        }
    }
}

/// Gain `β` and regularizer `δ` of the path-following correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParams<T: Real> {
    pub beta: T,
    pub regularizer: T,
}

/// Which coordination term `F_i` enters the local cost.
#[derive(Debug, Clone, PartialEq)]
pub enum CostVariant<T: Real> {
    /// Neighbor-averaged squared disagreement.
    Consensus,
    /// Pre-assigned ordering with separation `Δ` inside the virtual-time
    /// window `[gamma_start, gamma_end]`.
    OrderedSeparation {
        separation: T,
        gamma_start: T,
        gamma_end: T,
    },
    /// Competitive passage inside the window with tie-break priorities `ψ`.
    Race {
        priorities: Vec<T>,
        gamma_start: T,
        gamma_end: T,
    },
}

impl<T: Real> CostVariant<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            CostVariant::Consensus => Ok(()),
            CostVariant::OrderedSeparation {
                gamma_start, gamma_end, ..
            } => check_window(*gamma_start, *gamma_end),
            CostVariant::Race {
                priorities,
                gamma_start,
                gamma_end,
            } => {
                check_window(*gamma_start, *gamma_end)?;
                for (i, a) in priorities.iter().enumerate() {
                    if let Some(j) = priorities[i + 1..].iter().position(|b| b == a) {
                        return Err(ConfigError::DuplicatePriority(i, i + 1 + j));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_window<T: Real>(a: T, b: T) -> Result<(), ConfigError> {
    if a <= b {
        Ok(())
    } else {
        Err(ConfigError::EmptyWindow(a.as_f64(), b.as_f64()))
    }
}

/// Tolerances and caps of the local QP solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T: Real> {
    pub kkt_tolerance: T,
    pub feasibility_tolerance: T,
    /// Defaults to `100·K` when `None`.
    pub max_iterations: Option<usize>,
    /// Re-linearizations of the piecewise corridor terms per solve.
    pub pattern_iterations: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            kkt_tolerance: T::lit(1e-9),
            feasibility_tolerance: T::lit(1e-12),
            max_iterations: None,
            pattern_iterations: 8,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn iteration_cap(&self, horizon: usize) -> usize {
        self.max_iterations.unwrap_or(100 * horizon)
    }
}

/// Everything an agent needs to set up its local problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig<T: Real> {
    pub weights: Weights<T>,
    pub horizon: usize,
    pub step: T,
    pub gamma_bounds: GammaBounds<T>,
    pub alpha: AlphaParams<T>,
    pub cost: CostVariant<T>,
    /// Divide the corridor variants by `|𝒩|` like the consensus term.
    pub normalize_corridor: bool,
    /// `ξ(x) = 1` for `|x| <= tie_tolerance`; zero means exact equality.
    pub tie_tolerance: T,
    pub solver: SolverOptions<T>,
}

impl<T: Real> MpcConfig<T> {
    /// Consensus configuration with default solver settings.
    pub fn consensus(weights: Weights<T>, horizon: usize, step: T, gamma_bounds: GammaBounds<T>) -> Self {
        Self {
            weights,
            horizon,
            step,
            gamma_bounds,
            alpha: AlphaParams {
                beta: T::one(),
                regularizer: T::lit(1e-6),
            },
            cost: CostVariant::Consensus,
            normalize_corridor: false,
            tie_tolerance: T::zero(),
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights.validate()?;
        if self.horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        if !(self.step > T::zero()) {
            return Err(ConfigError::BadStep(self.step.as_f64()));
        }
        if !(self.alpha.beta > T::zero() && self.alpha.regularizer > T::zero()) {
            return Err(ConfigError::BadAlpha(
                self.alpha.beta.as_f64(),
                self.alpha.regularizer.as_f64(),
            ));
        }
        if self.tie_tolerance < T::zero() {
            return Err(ConfigError::NegativeTieTolerance(self.tie_tolerance.as_f64()));
        }
        self.cost.validate()
    }

    /// `δ̇_min = γ̇_min − 1`.
    pub fn rate_min(&self) -> T {
        self.gamma_bounds.deviation_rate_min()
    }

    /// `δ̇_max = γ̇_max − 1`.
    pub fn rate_max(&self) -> T {
        self.gamma_bounds.deviation_rate_max()
    }
}
