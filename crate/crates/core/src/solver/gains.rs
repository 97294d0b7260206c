use super::SolverError;
use crate::mpc::Weights;
use crate::scalar::Real;

/// Coefficients of the horizon-one unconstrained control law
/// `u = −a_h·ḡ − b_h·δ̇ + a_h·α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPair<T: Real> {
    pub a: T,
    pub b: T,
}

impl<T: Real> GainPair<T> {
    /// `a_h = w₁h²/(2(w₃+w₂h²+w₁h⁴/4))`, `b_h = (w₂h+w₁h³/2)/(w₃+w₂h²+w₁h⁴/4)`.
    pub fn new(weights: &Weights<T>, h: T) -> Result<Self, SolverError> {
        let Weights {
            coordination: w1,
            pace: w2,
            effort: w3,
        } = *weights;
        if !(w1 > T::zero() && w2 > T::zero() && w3 > T::zero() && h > T::zero()) {
            return Err(SolverError::NonPositiveInput(
                w1.as_f64(),
                w2.as_f64(),
                w3.as_f64(),
                h.as_f64(),
            ));
        }
        Ok(Self::evaluate(w1, w2, w3, h))
    }

    fn evaluate(w1: T, w2: T, w3: T, h: T) -> Self {
        let h2 = h * h;
        let h4 = h2 * h2;
        let den = w3 + w2 * h2 + w1 * h4 * T::lit(0.25);
        Self {
            a: w1 * h2 / (T::lit(2.0) * den),
            b: (w2 * h + w1 * h2 * h * T::lit(0.5)) / den,
        }
    }
}

/// Horizon-one unconstrained minimizer given the neighbor-averaged gap
/// `ḡ = (1/|𝒩|)Σ_j (δ_{i,1} − δ_{j,1})` of the previous predictions.
pub fn solve_k1_unconstrained<T: Real>(rate_prev: T, mean_gap: T, alpha: T, gains: &GainPair<T>) -> T {
    -gains.a * mean_gap - gains.b * rate_prev + gains.a * alpha
}

/// Horizon-one minimizer when no neighbor is reachable: only pace keeping and
/// effort remain, so `u = −w₂h·δ̇/(w₃ + w₂h²)`.
pub fn pace_only_control<T: Real>(rate_prev: T, weights: &Weights<T>, h: T) -> T {
    let g = GainPair::evaluate(T::zero(), weights.pace, weights.effort, h);
    -g.b * rate_prev
}
