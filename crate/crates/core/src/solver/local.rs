use super::{condense, solve_qp, QpSolution, SolverError};
use crate::mpc::{total_cost, tracking_terms, AgentState, CostVariant, MpcConfig, NeighborBundle};
use crate::scalar::Real;

/// Optimizer of one agent's local problem at one sampling instant.
#[derive(Debug, Clone)]
pub struct LocalSolution<T: Real> {
    pub state: AgentState<T>,
    pub qp: QpSolution<T>,
    /// Number of QP solves spent settling the piecewise corridor pattern.
    pub pattern_iterations: usize,
    /// Exact local cost of `state`, tie term included.
    pub cost: T,
}

/// Solves the local problem from `(delta0, rate0)` against the neighbors'
/// previous predictions.
///
/// The corridor window and race selection are frozen at the prediction made
/// by `warm` (the shifted previous plan), the QP is solved, and the pattern
/// is re-evaluated at the new optimizer until it stops changing or the
/// configured number of passes is spent. Among the passes the plan with the
/// lowest exact cost is returned.
#[allow(clippy::too_many_arguments)]
pub fn solve_local<T: Real>(
    cfg: &MpcConfig<T>,
    own_index: usize,
    delta0: T,
    rate0: T,
    neighbors: &NeighborBundle<T>,
    t_k: T,
    warm: &[T],
    step: u64,
) -> Result<LocalSolution<T>, SolverError> {
    let k = cfg.horizon;
    let h = cfg.step;
    let mut candidate: Vec<T> = if warm.len() == k {
        warm.to_vec()
    } else {
        vec![T::zero(); k]
    };
    let passes = match cfg.cost {
        CostVariant::Consensus => 1,
        _ => cfg.solver.pattern_iterations.max(1),
    };
    let mut best: Option<LocalSolution<T>> = None;
    let mut previous_terms = None;
    for pass in 1..=passes {
        let at = AgentState::from_controls(delta0, rate0, candidate.clone(), h, step);
        let terms = tracking_terms(&at.delta, own_index, neighbors, cfg, t_k);
        if previous_terms.as_ref() == Some(&terms) {
            break;
        }
        let qp = condense(cfg, delta0, rate0, &terms)?;
        let sol = solve_qp(&qp, &cfg.solver)?;
        candidate = sol.u.iter().copied().collect();
        let state = AgentState::from_controls(delta0, rate0, candidate.clone(), h, step);
        let cost = total_cost(&state, own_index, neighbors, cfg, t_k);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(LocalSolution {
                state,
                qp: sol,
                pattern_iterations: pass,
                cost,
            });
        } else if let Some(b) = best.as_mut() {
            b.pattern_iterations = pass;
        }
        previous_terms = Some(terms);
    }
    Ok(best.expect("at least one pass runs"))
}

/// Unconstrained optimizer of a condensed problem, used as a cross-check.
#[cfg(test)]
pub(crate) fn unconstrained<T: Real>(qp: &super::CondensedQp<T>) -> nalgebra::DVector<T> {
    qp.hessian
        .clone()
        .cholesky()
        .expect("positive definite")
        .solve(&(-&qp.gradient))
}
