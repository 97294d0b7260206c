use crate::scalar::Real;

/// Predicted deviation trajectory of one agent at one sampling instant.
///
/// `delta` and `rate` hold slots `τ = 0..=K`, `control` holds `τ = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState<T: Real> {
    pub delta: Vec<T>,
    pub rate: Vec<T>,
    pub control: Vec<T>,
    pub step: u64,
}

impl<T: Real> AgentState<T> {
    /// Rolls the double integrator forward from `(delta0, rate0)` under `control`.
    pub fn from_controls(delta0: T, rate0: T, control: Vec<T>, h: T, step: u64) -> Self {
        let half_h2 = h * h * T::lit(0.5);
        let mut delta = Vec::with_capacity(control.len() + 1);
        let mut rate = Vec::with_capacity(control.len() + 1);
        delta.push(delta0);
        rate.push(rate0);
        for (tau, &u) in control.iter().enumerate() {
            delta.push(delta[tau] + h * rate[tau] + half_h2 * u);
            rate.push(rate[tau] + h * u);
        }
        Self {
            delta,
            rate,
            control,
            step,
        }
    }

    /// Step-zero prediction: `δ⁰ = γ⁰`, `δ̇⁰ = γ̇⁰ − 1`, propagated with zero input.
    pub fn bootstrap(gamma0: T, gamma_rate0: T, horizon: usize, h: T) -> Self {
        Self::from_controls(gamma0, gamma_rate0 - T::one(), vec![T::zero(); horizon], h, 0)
    }

    pub fn horizon(&self) -> usize {
        self.control.len()
    }

    /// Largest violation of the discrete double-integrator recursion.
    pub fn recursion_residual(&self, h: T) -> T {
        let half_h2 = h * h * T::lit(0.5);
        (0..self.horizon()).fold(T::zero(), |m, tau| {
            let u = self.control[tau];
            let rd = (self.delta[tau + 1] - self.delta[tau] - h * self.rate[tau] - half_h2 * u).abs();
            let rr = (self.rate[tau + 1] - self.rate[tau] - h * u).abs();
            m.max(rd).max(rr)
        })
    }

    /// Shifted previous plan used as the starting guess for the next solve:
    /// controls `u₁..u_{K−1}` followed by a zero.
    pub fn shifted_controls(&self) -> Vec<T> {
        let mut u: Vec<T> = self.control.iter().skip(1).copied().collect();
        u.push(T::zero());
        u
    }
}

/// Initial condition of the step-`k` problem from the step-`k−1` optimizer:
/// `δ₀ = δ^{k−1}_1 − α`, `δ̇₀ = δ̇^{k−1}_1`.
pub fn shift_initialize<T: Real>(prev: &AgentState<T>, alpha: T) -> (T, T) {
    (prev.delta[1] - alpha, prev.rate[1])
}

/// Last broadcast prediction of one neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPlan<T: Real> {
    pub index: usize,
    pub delta: Vec<T>,
}

/// Snapshot of the neighbors' step-`k−1` predictions seen by one agent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborBundle<T: Real> {
    pub plans: Vec<NeighborPlan<T>>,
}

impl<T: Real> NeighborBundle<T> {
    pub fn new(plans: Vec<NeighborPlan<T>>) -> Self {
        Self { plans }
    }

    /// Bundle from plain sequences, indexed `0..n` in order.
    pub fn from_sequences(seqs: Vec<Vec<T>>) -> Self {
        Self::new(
            seqs.into_iter()
                .enumerate()
                .map(|(index, delta)| NeighborPlan { index, delta })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_propagates_with_zero_input() {
        let s = AgentState::<f64>::bootstrap(4.5, 1.2, 3, 0.1);
        let want_rate = 0.2;
        for tau in 0..=3 {
            assert!((s.rate[tau] - want_rate).abs() < 1e-15);
            assert!((s.delta[tau] - (4.5 + 0.1 * want_rate * tau as f64)).abs() < 1e-14);
        }
        assert!(s.control.iter().all(|&u| u == 0.0));
        assert!(s.recursion_residual(0.1) < 1e-12);
    }

    #[test]
    fn shift_with_and_without_correction() {
        let prev = AgentState {
            delta: vec![1.0, 2.0],
            rate: vec![0.0, 0.3],
            control: vec![3.0],
            step: 4,
        };
        assert_eq!(shift_initialize(&prev, 0.0), (2.0, 0.3));
        assert_eq!(shift_initialize(&prev, 0.5), (1.5, 0.3));
    }

    #[test]
    fn controls_respect_recursion() {
        let s = AgentState::from_controls(0.3, -0.1, vec![0.5, -1.0, 2.0, 0.25], 0.05, 2);
        assert!(s.recursion_residual(0.05) < 1e-12);
        assert_eq!(s.shifted_controls(), vec![-1.0, 2.0, 0.25, 0.0]);
    }
}
