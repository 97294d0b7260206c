use super::certificate::ConvergenceCertificate;
use super::AnalysisError;
use crate::mission::GammaBounds;
use crate::scalar::Real;

/// Constraint-free operating region of the horizon-one scheme.
///
/// With `m = max{‖𝚫⁰‖_∞, ‖𝚫̇⁰‖_∞}`, both sufficient conditions hold when
/// `a·S₁·m + a·(S₂+1)·d ≤ R` for `R` the smallest right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityMargins<T: Real> {
    pub a1: T,
    pub a2: T,
    pub s1: T,
    pub s2: T,
    /// `γ̈_max − b·δ̇̄` per agent.
    pub input_rhs: Vec<T>,
    /// `b·min(δ̇_max, −δ̇_min)` per agent.
    pub rate_rhs: Vec<T>,
    /// Slack of the input condition at the given `(m, d)`, per agent.
    pub input_margin: Vec<T>,
    /// Slack of the rate condition at the given `(m, d)`, per agent.
    pub rate_margin: Vec<T>,
    /// `m` at which the binding condition is met with `d = 0`.
    pub init_intercept: T,
    /// `d` at which the binding condition is met with `m = 0`.
    pub disturbance_intercept: T,
    /// `ν_h`: half the initial-norm intercept.
    pub init_radius: T,
    /// `d_h`: half the disturbance intercept. Any `m < ν_h`, `d < d_h` satisfies both conditions.
    pub disturbance_bound: T,
    pub valid: bool,
    pub diagnostic: Option<String>,
}

/// Margins of the two sufficient conditions at disturbance bound `d` and
/// initial norm `init_norm`, one entry per agent in `bounds`.
pub fn feasibility_margins<T: Real>(
    cert: &ConvergenceCertificate<T>,
    bounds: &[GammaBounds<T>],
    d: T,
    init_norm: T,
) -> Result<FeasibilityMargins<T>, AnalysisError> {
    if !cert.valid {
        return Err(AnalysisError::InvalidCertificate(cert.diagnostic().unwrap_or_default()));
    }
    let (norm_v, norm_v_inv) = cert.eigenvector_norms.ok_or(AnalysisError::MissingEigenvectors)?;
    let (a, b, h) = (cert.gains.a, cert.gains.b, cert.step);
    let b_norm = (a * h * h * T::lit(0.5) - T::one()).abs().max((a * h).abs());
    let decay = (-cert.decay_rate * h).exp();
    let a1 = cert.gelfand_max * norm_v_inv;
    let a2 = cert.gelfand_max * b_norm * norm_v_inv * decay / (cert.rate - decay);
    let two_v = T::lit(2.0) * norm_v;
    let (s1, s2) = (two_v * a1, two_v * a2);

    let input_rhs: Vec<T> = bounds
        .iter()
        .map(|g| {
            let (lo, hi) = (g.deviation_rate_min(), g.deviation_rate_max());
            g.accel_max - b * lo.abs().max(hi)
        })
        .collect();
    let rate_rhs: Vec<T> = bounds
        .iter()
        .map(|g| b * g.deviation_rate_max().min(-g.deviation_rate_min()))
        .collect();
    let load = a * (s1 * init_norm + s2 * d) + a * d;
    let input_margin = input_rhs.iter().map(|&r| r - load).collect();
    let rate_margin = rate_rhs.iter().map(|&r| r - load).collect();

    let rhs = input_rhs.iter().chain(&rate_rhs).fold(T::infinity(), |m, &r| m.min(r));
    let (valid, diagnostic) = if rhs > T::zero() {
        (true, None)
    } else {
        (
            false,
            Some(format!(
                "right-hand side {:.3e} is not positive; the step is too large for the bounds",
                rhs.as_f64()
            )),
        )
    };
    let positive = rhs.max(T::zero());
    let init_intercept = positive / (a * s1);
    let disturbance_intercept = positive / (a * (s2 + T::one()));
    Ok(FeasibilityMargins {
        a1,
        a2,
        s1,
        s2,
        input_rhs,
        rate_rhs,
        input_margin,
        rate_margin,
        init_intercept,
        disturbance_intercept,
        init_radius: init_intercept * T::lit(0.5),
        disturbance_bound: disturbance_intercept * T::lit(0.5),
        valid,
        diagnostic,
    })
}
