use nalgebra::Vector3;

use super::config::{AlphaParams, CostVariant, MpcConfig};
use super::state::{AgentState, NeighborBundle};
use crate::scalar::Real;

/// Path-following correction: the reference-minus-actual error projected on
/// the reference velocity, `β·(x_γ − x)ᵀẋ_γ / (‖ẋ_γ‖ + δ)`.
///
/// Positive when the vehicle lags behind its reference point.
pub fn alpha_correction<T: Real>(
    reference_pos: &Vector3<T>,
    reference_vel: &Vector3<T>,
    actual_pos: &Vector3<T>,
    params: &AlphaParams<T>,
) -> T {
    params.beta * (reference_pos - actual_pos).dot(reference_vel) / (reference_vel.norm() + params.regularizer)
}

/// Virtual-time window of a corridor term, evaluated at sampling time `t_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorWindow<T: Real> {
    pub start: T,
    pub end: T,
    pub t_k: T,
}

impl<T: Real> CorridorWindow<T> {
    pub fn contains(&self, delta: T) -> bool {
        in_window(delta, self.t_k, self.start, self.end)
    }
}

/// `𝓘 = 1[γ₁* ≤ δ + t_k ≤ γ₂*]`.
pub fn in_window<T: Real>(delta: T, t_k: T, start: T, end: T) -> bool {
    let g = delta + t_k;
    start <= g && g <= end
}

/// Neighbor-averaged squared disagreement over the predicted slots `τ = 1..K`.
///
/// `own` and every neighbor sequence hold slots `0..=K`; slot 0 is fixed by the
/// initial condition and does not enter. An empty bundle contributes zero.
pub fn cost_consensus<T: Real>(own: &[T], neighbors: &NeighborBundle<T>) -> T {
    if neighbors.is_empty() {
        return T::zero();
    }
    let sum = neighbors.plans.iter().fold(T::zero(), |acc, p| {
        own.iter()
            .zip(&p.delta)
            .skip(1)
            .fold(acc, |a, (&x, &y)| a + (x - y) * (x - y))
    });
    sum / T::lit(neighbors.len() as f64)
}

fn corridor_scale<T: Real>(normalize: bool, neighbors: &NeighborBundle<T>) -> T {
    if normalize && !neighbors.is_empty() {
        T::one() / T::lit(neighbors.len() as f64)
    } else {
        T::one()
    }
}

/// Ordered-separation term: plain squared gaps outside the window, gaps offset
/// by `(i − j)·Δ` inside it.
pub fn cost_ordered<T: Real>(
    own: &[T],
    own_index: usize,
    neighbors: &NeighborBundle<T>,
    separation: T,
    window: CorridorWindow<T>,
    normalize: bool,
) -> T {
    let mut sum = T::zero();
    for (tau, &x) in own.iter().enumerate().skip(1) {
        let active = window.contains(x);
        for p in &neighbors.plans {
            let mut gap = x - p.delta[tau];
            if active {
                gap += index_offset::<T>(own_index, p.index) * separation;
            }
            sum += gap * gap;
        }
    }
    sum * corridor_scale(normalize, neighbors)
}

/// Race term: plain squared gaps outside the window; inside it, the squared
/// lag behind every neighbor that is ahead plus `ψ_i` for every exact tie.
pub fn cost_race<T: Real>(
    own: &[T],
    own_index: usize,
    neighbors: &NeighborBundle<T>,
    priorities: &[T],
    window: CorridorWindow<T>,
    normalize: bool,
    tie_tolerance: T,
) -> T {
    let psi = priorities[own_index];
    let mut sum = T::zero();
    for (tau, &x) in own.iter().enumerate().skip(1) {
        let active = window.contains(x);
        for p in &neighbors.plans {
            let lead = p.delta[tau] - x;
            if active {
                let lag = lead.max(T::zero());
                sum += lag * lag;
                if lead.abs() <= tie_tolerance {
                    sum += psi;
                }
            } else {
                sum += lead * lead;
            }
        }
    }
    sum * corridor_scale(normalize, neighbors)
}

fn index_offset<T: Real>(i: usize, j: usize) -> T {
    T::lit(i as f64) - T::lit(j as f64)
}

/// `J_i = w₁·F_i + w₂·Σ_{τ=1..K} δ̇_τ² + w₃·Σ_{τ=0..K−1} u_τ²`.
pub fn total_cost<T: Real>(
    state: &AgentState<T>,
    own_index: usize,
    neighbors: &NeighborBundle<T>,
    cfg: &MpcConfig<T>,
    t_k: T,
) -> T {
    let coordination = if neighbors.is_empty() {
        T::zero()
    } else {
        match &cfg.cost {
            CostVariant::Consensus => cost_consensus(&state.delta, neighbors),
            CostVariant::OrderedSeparation {
                separation,
                gamma_start,
                gamma_end,
            } => cost_ordered(
                &state.delta,
                own_index,
                neighbors,
                *separation,
                CorridorWindow {
                    start: *gamma_start,
                    end: *gamma_end,
                    t_k,
                },
                cfg.normalize_corridor,
            ),
            CostVariant::Race {
                priorities,
                gamma_start,
                gamma_end,
            } => cost_race(
                &state.delta,
                own_index,
                neighbors,
                priorities,
                CorridorWindow {
                    start: *gamma_start,
                    end: *gamma_end,
                    t_k,
                },
                cfg.normalize_corridor,
                cfg.tie_tolerance,
            ),
        }
    };
    let pace = state.rate.iter().skip(1).fold(T::zero(), |a, &r| a + r * r);
    let effort = state.control.iter().fold(T::zero(), |a, &u| a + u * u);
    cfg.weights.coordination * coordination + cfg.weights.pace * pace + cfg.weights.effort * effort
}

/// Quadratic surrogate `weight·(δ_τ − target)²` of the coordination term at
/// one prediction slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingTerm<T: Real> {
    pub weight: T,
    pub target: T,
}

/// Quadratic model of `F_i` in the predicted deviations, one term per slot
/// `τ = 1..K`, up to an additive constant.
///
/// The corridor variants are piecewise: the window indicator and the race
/// lag selection are frozen at the candidate prediction `at` (slots `0..=K`).
/// The race tie term is constant in the decision variables and is left out.
pub fn tracking_terms<T: Real>(
    at: &[T],
    own_index: usize,
    neighbors: &NeighborBundle<T>,
    cfg: &MpcConfig<T>,
    t_k: T,
) -> Vec<TrackingTerm<T>> {
    let horizon = at.len() - 1;
    if neighbors.is_empty() {
        return vec![
            TrackingTerm {
                weight: T::zero(),
                target: T::zero(),
            };
            horizon
        ];
    }
    let n = T::lit(neighbors.len() as f64);
    let corridor = corridor_scale(cfg.normalize_corridor, neighbors);
    (1..=horizon)
        .map(|tau| {
            // accumulate Σ c·(x − t)² as weight and weighted target sum
            let mut weight = T::zero();
            let mut moment = T::zero();
            let mut add = |c: T, target: T| {
                weight += c;
                moment += c * target;
            };
            match &cfg.cost {
                CostVariant::Consensus => {
                    for p in &neighbors.plans {
                        add(T::one() / n, p.delta[tau]);
                    }
                }
                CostVariant::OrderedSeparation {
                    separation,
                    gamma_start,
                    gamma_end,
                } => {
                    let active = in_window(at[tau], t_k, *gamma_start, *gamma_end);
                    for p in &neighbors.plans {
                        let shift = if active {
                            index_offset::<T>(own_index, p.index) * *separation
                        } else {
                            T::zero()
                        };
                        add(corridor, p.delta[tau] - shift);
                    }
                }
                CostVariant::Race {
                    gamma_start, gamma_end, ..
                } => {
                    let active = in_window(at[tau], t_k, *gamma_start, *gamma_end);
                    for p in &neighbors.plans {
                        if !active || p.delta[tau] > at[tau] {
                            add(corridor, p.delta[tau]);
                        }
                    }
                }
            }
            let target = if weight > T::zero() { moment / weight } else { T::zero() };
            TrackingTerm { weight, target }
        })
        .collect()
}
