use nalgebra::Matrix2;

use super::modes::{spectral_radius, ModeMatrix};
use super::AnalysisError;
use crate::graph::SpectralDecomposition;
use crate::mpc::Weights;
use crate::scalar::Real;
use crate::solver::GainPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions<T: Real> {
    /// Added to the largest lower bound when choosing `r_h`.
    pub margin: T,
    /// Powers scanned for the Gelfand constants.
    pub power_horizon: usize,
}

impl<T: Real> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self {
            margin: T::lit(1e-3),
            power_horizon: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCertificate<T: Real> {
    pub lambda: T,
    pub rho: T,
    /// `max_{k ≤ K_max} ‖Q^k‖_∞ / r_h^k`; not defined for the zero mode.
    pub gelfand: Option<T>,
}

/// `Q₁^k = P + q^k F` for the zero-eigenvalue block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMode<T: Real> {
    pub q: T,
    pub p: Matrix2<T>,
    pub f: Matrix2<T>,
}

impl<T: Real> ZeroMode<T> {
    fn new(block: &Matrix2<T>) -> Self {
        let q = block[(1, 1)];
        let s = T::one() / (T::one() - q);
        Self {
            q,
            p: (block - Matrix2::identity() * q) * s,
            f: (Matrix2::identity() - block) * s,
        }
    }

    pub fn power(&self, k: i32) -> Matrix2<T> {
        self.p + self.f * self.q.powi(k)
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceCertificate<T: Real> {
    pub valid: bool,
    pub step: T,
    pub decay_rate: T,
    pub gains: GainPair<T>,
    /// One entry per eigenvalue, ascending; index 0 is the zero mode.
    pub modes: Vec<ModeCertificate<T>>,
    pub rate: T,
    /// `C_∞ = max_{i≥2} C_i`.
    pub gelfand_max: T,
    pub zero_mode: ZeroMode<T>,
    /// Eigenvalues whose block has `ρ ≥ 1`.
    pub unstable: Vec<T>,
    /// `‖V‖_∞` and `‖V⁻¹‖_∞` when built from a decomposition.
    pub eigenvector_norms: Option<(T, T)>,
}

impl<T: Real> ConvergenceCertificate<T> {
    pub fn max_rho(&self) -> T {
        self.modes.iter().skip(1).fold(T::zero(), |m, c| m.max(c.rho))
    }

    pub fn diagnostic(&self) -> Option<String> {
        if self.valid {
            return None;
        }
        let list: Vec<String> = self.unstable.iter().map(|l| format!("{:.6}", l.as_f64())).collect();
        Some(format!(
            "spectral radius ≥ 1 for λ = [{}] at h = {}; try a smaller step",
            list.join(", "),
            self.step.as_f64()
        ))
    }
}

/// Certificate for the modes of a connected graph.
pub fn certify<T: Real>(
    spectral: &SpectralDecomposition<T>,
    gains: &GainPair<T>,
    h: T,
    nu: T,
    opts: &CertifyOptions<T>,
) -> Result<ConvergenceCertificate<T>, AnalysisError> {
    let mut cert = certify_eigenvalues(&spectral.eigenvalues, gains, h, nu, opts)?;
    cert.eigenvector_norms = Some((inf_norm(&spectral.vectors), inf_norm(&spectral.inverse)));
    Ok(cert)
}

/// Certificate from raw eigenvalues; `eigenvalues[0]` is taken as the zero
/// mode. Useful for synthetic spectra outside `[0, 2]`.
pub fn certify_eigenvalues<T: Real>(
    eigenvalues: &[T],
    gains: &GainPair<T>,
    h: T,
    nu: T,
    opts: &CertifyOptions<T>,
) -> Result<ConvergenceCertificate<T>, AnalysisError> {
    if !(nu > T::zero()) {
        return Err(AnalysisError::BadDecayRate(nu.as_f64()));
    }
    if !(h > T::zero()) {
        return Err(AnalysisError::BadStep(h.as_f64()));
    }
    let blocks: Vec<ModeMatrix<T>> = eigenvalues.iter().map(|&l| ModeMatrix::new(gains, h, l)).collect();
    let rhos: Vec<T> = blocks.iter().map(spectral_radius).collect();
    let unstable: Vec<T> = blocks
        .iter()
        .zip(&rhos)
        .skip(1)
        .filter(|(_, &r)| r >= T::one())
        .map(|(m, _)| m.lambda)
        .collect();
    let q = T::one() - h * gains.b;
    let floor = rhos.iter().skip(1).fold((-nu * h).exp().max(q.abs()), |m, &r| m.max(r));
    let valid = unstable.is_empty() && floor < T::one();
    let rate = if valid {
        let r = floor + opts.margin;
        if r < T::one() {
            r
        } else {
            (floor + T::one()) * T::lit(0.5)
        }
    } else {
        T::one()
    };
    let modes: Vec<ModeCertificate<T>> = blocks
        .iter()
        .zip(&rhos)
        .enumerate()
        .map(|(i, (m, &rho))| ModeCertificate {
            lambda: m.lambda,
            rho,
            gelfand: (valid && i > 0).then(|| gelfand_constant(&m.q, rate, opts.power_horizon)),
        })
        .collect();
    let gelfand_max = modes.iter().filter_map(|m| m.gelfand).fold(T::zero(), |a, c| a.max(c));
    Ok(ConvergenceCertificate {
        valid,
        step: h,
        decay_rate: nu,
        gains: *gains,
        zero_mode: ZeroMode::new(&blocks.first().map_or_else(Matrix2::identity, |b| b.q)),
        modes,
        rate,
        gelfand_max,
        unstable,
        eigenvector_norms: None,
    })
}

/// `max_{0≤k≤n} ‖Q^k‖_∞ / r^k`, iterating on `Q/r` so nothing overflows.
fn gelfand_constant<T: Real>(q: &Matrix2<T>, r: T, n: usize) -> T {
    let scaled = q / r;
    let mut m = Matrix2::<T>::identity();
    let mut best = T::one();
    for _ in 0..n {
        m *= scaled;
        best = best.max(inf_norm2(&m));
    }
    best
}

fn inf_norm2<T: Real>(m: &Matrix2<T>) -> T {
    (m[(0, 0)].abs() + m[(0, 1)].abs()).max(m[(1, 0)].abs() + m[(1, 1)].abs())
}

/// Max row sum.
pub(crate) fn inf_norm<T: Real>(m: &nalgebra::DMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |a, &x| a + x.abs()))
        .fold(T::zero(), |a, s| a.max(s))
}

/// Outcome of the largest-stable-step search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HMax<T: Real> {
    /// Threshold bracketed to the relative tolerance.
    Bounded { h: T },
    /// Every probe up to `cap` is stable.
    Unbounded { cap: T },
}

impl<T: Real> HMax<T> {
    pub fn value(&self) -> T {
        match *self {
            HMax::Bounded { h } => h,
            HMax::Unbounded { cap } => cap,
        }
    }
}

/// Largest step for which every nonzero mode has `ρ < 1`.
///
/// Probes double from `1e-6` until a probe fails or `cap` is reached, then
/// bisects (geometrically) until the bracket is within `tolerance` relative.
pub fn h_max<T: Real>(eigenvalues: &[T], weights: &Weights<T>, tolerance: T, cap: T) -> Result<HMax<T>, AnalysisError> {
    let stable = |h: T| -> Result<bool, AnalysisError> {
        let g = GainPair::new(weights, h)?;
        Ok(eigenvalues
            .iter()
            .skip(1)
            .all(|&l| spectral_radius(&ModeMatrix::new(&g, h, l)) < T::one()))
    };
    let smallest = T::lit(1e-6);
    if !stable(smallest)? {
        return Err(AnalysisError::UnstableAtSmallestStep(smallest.as_f64()));
    }
    let mut lo = smallest;
    let mut hi = None;
    while lo < cap {
        let probe = (lo * T::lit(2.0)).min(cap);
        if stable(probe)? {
            lo = probe;
        } else {
            hi = Some(probe);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return Ok(HMax::Unbounded { cap });
    };
    while hi / lo > T::one() + tolerance {
        let mid = (lo * hi).sqrt();
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(HMax::Bounded { h: lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Topology, TopologyKind};
    use approx::assert_abs_diff_eq;

    fn k2() -> SpectralDecomposition<f64> {
        SpectralDecomposition::new(&Topology::build(2, &TopologyKind::Complete).unwrap()).unwrap()
    }

    #[test]
    fn two_agent_certificate() {
        let g = GainPair::new(&Weights::new(1.0, 1.0, 1.0), 0.1).unwrap();
        let c = certify(&k2(), &g, 0.1, 1.0, &CertifyOptions::default()).unwrap();
        assert!(c.valid);
        assert_abs_diff_eq!(c.modes[1].rho, 0.995038, epsilon = 1e-6);
        assert_abs_diff_eq!(c.rate, c.modes[1].rho + 1e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.rate, 0.99604, epsilon = 1e-5);
        assert!(c.gelfand_max >= 1.0 && c.gelfand_max.is_finite());
        assert!(c.diagnostic().is_none());
    }

    #[test]
    fn zero_mode_projection_identities() {
        let g = GainPair::new(&Weights::new(1.0, 1.0, 1.0), 0.1).unwrap();
        let c = certify(&k2(), &g, 0.1, 1.0, &CertifyOptions::default()).unwrap();
        let z = c.zero_mode;
        assert_eq!(z.p[(1, 0)], 0.0);
        assert_eq!(z.p[(1, 1)], 0.0);
        assert!((z.p + z.f - Matrix2::identity()).amax() < 1e-12);
        assert!((z.p * z.p - z.p).amax() < 1e-9);
        let q1 = ModeMatrix::new(&g, 0.1, 0.0).q;
        let mut m = Matrix2::identity();
        for k in 0..=100 {
            assert!((z.power(k) - m).amax() < 1e-10, "k = {k}");
            m *= q1;
        }
    }

    #[test]
    fn synthetic_large_eigenvalue_is_rejected() {
        // λ = 3 loses stability once h > 2·sqrt(w₂/w₁)
        let w = Weights::new(1.0, 1.0, 1.0);
        let g = GainPair::new(&w, 2.5).unwrap();
        let c = certify_eigenvalues(&[0.0, 3.0], &g, 2.5, 1.0, &CertifyOptions::default()).unwrap();
        assert!(!c.valid);
        assert_eq!(c.unstable, vec![3.0]);
        assert!(c.diagnostic().unwrap().contains("3.000000"));
        match h_max::<f64>(&[0.0, 3.0], &w, 1e-6, 10.0).unwrap() {
            HMax::Bounded { h } => assert!((h - 2.0).abs() < 1e-5, "{h}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalized_spectra_never_lose_stability() {
        let w = Weights::new(1.0, 1.0, 1.0);
        let r = h_max(&[0.0, 1.0, 2.0], &w, 1e-6, 10.0).unwrap();
        assert_eq!(r, HMax::Unbounded { cap: 10.0 });
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GainPair::new(&Weights::new(1.0, 1.0, 1.0), 0.1).unwrap();
        assert!(certify(&k2(), &g, 0.1, 0.0, &CertifyOptions::default()).is_err());
        assert!(certify(&k2(), &g, -0.1, 1.0, &CertifyOptions::default()).is_err());
    }
}
