use nalgebra::{DMatrix, DVector};

use super::SolverError;
use crate::mpc::{MpcConfig, TrackingTerm};
use crate::scalar::Real;

/// Which physical limit a constraint row encodes; `τ` is the prediction slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    RateUpper(usize),
    RateLower(usize),
    ControlUpper(usize),
    ControlLower(usize),
}

/// Row `a·u ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T: Real> {
    pub row: DVector<T>,
    pub bound: T,
    pub kind: ConstraintKind,
}

/// Local problem in the control sequence alone:
/// minimize `½uᵀHu + gᵀu + c` subject to the stacked rows.
#[derive(Debug, Clone)]
pub struct CondensedQp<T: Real> {
    pub hessian: DMatrix<T>,
    pub gradient: DVector<T>,
    pub constant: T,
    pub constraints: Vec<LinearConstraint<T>>,
    pub delta0: T,
    pub rate0: T,
    pub step: T,
    pub rate_min: T,
    pub rate_max: T,
}

impl<T: Real> CondensedQp<T> {
    pub fn horizon(&self) -> usize {
        self.gradient.len()
    }

    pub fn objective(&self, u: &DVector<T>) -> T {
        (&self.hessian * u).dot(u) * T::lit(0.5) + self.gradient.dot(u) + self.constant
    }

    /// Largest positive constraint residual at `u`.
    pub fn max_violation(&self, u: &DVector<T>) -> T {
        self.constraints
            .iter()
            .fold(T::zero(), |m, c| m.max(c.row.dot(u) - c.bound))
    }

    /// A feasible starting point: zero input, except that a first control
    /// nudges an initial rate lying marginally outside its bounds back in.
    pub fn feasible_start(&self) -> DVector<T> {
        let (rate_min, rate_max) = (self.rate_min, self.rate_max);
        let mut u = DVector::zeros(self.horizon());
        if self.rate0 > rate_max {
            u[0] = (rate_max - self.rate0) / self.step;
        } else if self.rate0 < rate_min {
            u[0] = (rate_min - self.rate0) / self.step;
        }
        u
    }
}

/// Eliminates the states through the exact double-integrator recursion:
/// `δ̇_τ = δ̇₀ + hΣ_{s<τ}u_s`, `δ_τ = δ₀ + τhδ̇₀ + h²Σ_{s<τ}(τ−s−½)u_s`.
///
/// `terms[τ−1]` is the coordination surrogate at slot `τ`.
pub fn condense<T: Real>(
    cfg: &MpcConfig<T>,
    delta0: T,
    rate0: T,
    terms: &[TrackingTerm<T>],
) -> Result<CondensedQp<T>, SolverError> {
    let k = cfg.horizon;
    assert_eq!(terms.len(), k, "one tracking term per prediction slot");
    let h = cfg.step;
    let (rate_min, rate_max) = (cfg.rate_min(), cfg.rate_max());
    let slack = cfg.solver.feasibility_tolerance.max(T::lit(1e-9));
    if !(rate0 >= rate_min - slack && rate0 <= rate_max + slack) {
        return Err(SolverError::InfeasibleInitialRate {
            rate: rate0.as_f64(),
            min: rate_min.as_f64(),
            max: rate_max.as_f64(),
        });
    }

    let mut g_delta = DMatrix::<T>::zeros(k, k);
    let mut g_rate = DMatrix::<T>::zeros(k, k);
    for tau in 1..=k {
        for s in 0..tau {
            g_delta[(tau - 1, s)] = h * h * (T::lit((tau - s) as f64) - T::lit(0.5));
            g_rate[(tau - 1, s)] = h;
        }
    }
    let w = &cfg.weights;
    let mut hessian = DMatrix::<T>::identity(k, k) * w.effort;
    let mut gradient = DVector::<T>::zeros(k);
    let mut constant = T::zero();
    for tau in 1..=k {
        let TrackingTerm { weight, target } = terms[tau - 1];
        let c = w.coordination * weight;
        let free_delta = delta0 + T::lit(tau as f64) * h * rate0 - target;
        let rd = g_delta.row(tau - 1);
        let rr = g_rate.row(tau - 1);
        hessian += rd.transpose() * rd * c + rr.transpose() * rr * w.pace;
        gradient += rd.transpose() * (c * free_delta) + rr.transpose() * (w.pace * rate0);
        constant += c * free_delta * free_delta + w.pace * rate0 * rate0;
    }
    hessian *= T::lit(2.0);
    gradient *= T::lit(2.0);
    // keep the Hessian exactly symmetric
    let hessian = (&hessian + hessian.transpose()) * T::lit(0.5);

    let mut constraints = Vec::with_capacity(4 * k);
    for tau in 1..=k {
        let row = g_rate.row(tau - 1).transpose();
        constraints.push(LinearConstraint {
            row: row.clone(),
            bound: rate_max - rate0,
            kind: ConstraintKind::RateUpper(tau),
        });
        constraints.push(LinearConstraint {
            row: -row,
            bound: rate0 - rate_min,
            kind: ConstraintKind::RateLower(tau),
        });
    }
    let accel = cfg.gamma_bounds.accel_max;
    for tau in 0..k {
        let mut e = DVector::<T>::zeros(k);
        e[tau] = T::one();
        constraints.push(LinearConstraint {
            row: e.clone(),
            bound: accel,
            kind: ConstraintKind::ControlUpper(tau),
        });
        constraints.push(LinearConstraint {
            row: -e,
            bound: accel,
            kind: ConstraintKind::ControlLower(tau),
        });
    }
    Ok(CondensedQp {
        hessian,
        gradient,
        constant,
        constraints,
        delta0,
        rate0,
        step: h,
        rate_min,
        rate_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::GammaBounds;
    use crate::mpc::{AgentState, Weights};
    use approx::assert_abs_diff_eq;

    fn config(k: usize) -> MpcConfig<f64> {
        MpcConfig::consensus(
            Weights::new(1.0, 1.0, 1.0),
            k,
            0.1,
            GammaBounds::new(0.5, 1.5, 1.0).unwrap(),
        )
    }

    fn term(target: f64) -> TrackingTerm<f64> {
        TrackingTerm { weight: 1.0, target }
    }

    #[test]
    fn horizon_one_hessian() {
        let qp = condense(&config(1), 0.0, 0.0, &[term(0.0)]).unwrap();
        let den = 1.0 + 0.01 + 0.0001 / 4.0;
        assert_abs_diff_eq!(qp.hessian[(0, 0)], 2.0 * den, epsilon = 1e-14);
        assert_eq!(qp.constraints.len(), 4);
    }

    #[test]
    fn objective_matches_rolled_out_cost() {
        let cfg = config(4);
        let terms = [term(0.3), term(-0.1), term(0.2), term(0.05)];
        let qp = condense(&cfg, 0.4, -0.2, &terms).unwrap();
        let u = vec![0.3, -0.7, 0.1, 0.9];
        let st = AgentState::from_controls(0.4, -0.2, u.clone(), 0.1, 0);
        let mut direct = 0.0;
        for tau in 1..=4 {
            direct += (st.delta[tau] - terms[tau - 1].target).powi(2) + st.rate[tau].powi(2);
        }
        direct += u.iter().map(|x| x * x).sum::<f64>();
        assert_abs_diff_eq!(qp.objective(&DVector::from_vec(u.clone())), direct, epsilon = 1e-12);
        // rate rows reproduce the predicted rates
        let uv = DVector::from_vec(u);
        for tau in 1..=4 {
            let c = &qp.constraints[2 * (tau - 1)];
            assert_abs_diff_eq!(c.row.dot(&uv) + qp.rate0, st.rate[tau], epsilon = 1e-14);
        }
    }

    #[test]
    fn hessian_is_bounded_below_by_effort() {
        let qp = condense(&config(6), 0.0, 0.0, &[term(0.0); 6]).unwrap();
        let eig = qp.hessian.clone().symmetric_eigenvalues();
        assert!(eig.min() >= 2.0 - 1e-12);
    }

    #[test]
    fn infeasible_initial_rate_is_rejected() {
        let err = condense(&config(2), 0.0, 0.7, &[term(0.0); 2]).unwrap_err();
        assert!(matches!(err, SolverError::InfeasibleInitialRate { .. }));
        assert!(condense(&config(2), 0.0, 0.5 + 1e-12, &[term(0.0); 2]).is_ok());
    }
}
