use nalgebra::{Matrix2, Vector2};

use crate::graph::SpectralDecomposition;
use crate::scalar::Real;
use crate::solver::GainPair;

/// Decoupled 2×2 closed-loop block of one Laplacian mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix<T: Real> {
    pub q: Matrix2<T>,
    pub b: Vector2<T>,
    pub lambda: T,
    /// `Q − I`, formed directly so that small steps keep their precision.
    pub offset: Matrix2<T>,
}

impl<T: Real> ModeMatrix<T> {
    /// `Q = [[1−(h²/2)aλ, h−(h²/2)b], [−haλ, 1−hb]]`, `B = [(ah²/2)−1, ah]`.
    pub fn new(gains: &GainPair<T>, h: T, lambda: T) -> Self {
        let half_h2 = h * h * T::lit(0.5);
        let (a, b) = (gains.a, gains.b);
        let offset = Matrix2::new(-half_h2 * a * lambda, h - half_h2 * b, -h * a * lambda, -h * b);
        Self {
            q: offset + Matrix2::identity(),
            b: Vector2::new(a * half_h2 - T::one(), a * h),
            lambda,
            offset,
        }
    }

    /// `2 − h·b − (h²/2)·a·λ`.
    pub fn trace_formula(gains: &GainPair<T>, h: T, lambda: T) -> T {
        T::lit(2.0) - h * gains.b - h * h * T::lit(0.5) * gains.a * lambda
    }

    /// `1 − h·b + (h²/2)·a·λ`.
    pub fn det_formula(gains: &GainPair<T>, h: T, lambda: T) -> T {
        T::one() - h * gains.b + h * h * T::lit(0.5) * gains.a * lambda
    }

    pub fn trace(&self) -> T {
        self.q[(0, 0)] + self.q[(1, 1)]
    }

    pub fn det(&self) -> T {
        self.q[(0, 0)] * self.q[(1, 1)] - self.q[(0, 1)] * self.q[(1, 0)]
    }
}

/// One block per eigenvalue of the normalized Laplacian, in ascending order.
pub fn mode_matrices<T: Real>(gains: &GainPair<T>, h: T, spectral: &SpectralDecomposition<T>) -> Vec<ModeMatrix<T>> {
    spectral
        .eigenvalues
        .iter()
        .map(|&l| ModeMatrix::new(gains, h, l))
        .collect()
}

/// Largest eigenvalue magnitude of the block. Complex pairs have
/// `ρ² = det`; real pairs use the quadratic formula.
///
/// Both are evaluated through `E = Q − I`: the eigenvalues are `1 + ε` with
/// `ε` the roots of `ε² − tr(E)ε + det(E)`, which avoids the cancellation in
/// `tr² − 4det` when `Q` is close to the identity.
pub fn spectral_radius<T: Real>(m: &ModeMatrix<T>) -> T {
    let e = &m.offset;
    let tr = e[(0, 0)] + e[(1, 1)];
    let det = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)];
    let disc = tr * tr - T::lit(4.0) * det;
    if disc < T::zero() {
        // |1 + ε|² = 1 + tr(E) + det(E) = det(Q)
        (T::one() + (tr + det)).max(T::zero()).sqrt()
    } else {
        let root = disc.sqrt();
        let hi = T::one() + (tr + root) * T::lit(0.5);
        let lo = T::one() + (tr - root) * T::lit(0.5);
        hi.abs().max(lo.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::Weights;
    use approx::assert_abs_diff_eq;

    fn unit_gains(h: f64) -> GainPair<f64> {
        GainPair::new(&Weights::new(1.0, 1.0, 1.0), h).unwrap()
    }

    #[test]
    fn zero_mode_is_upper_triangular() {
        let g = unit_gains(0.1);
        let m = ModeMatrix::new(&g, 0.1, 0.0);
        assert_eq!(m.q[(1, 0)], 0.0);
        assert_eq!(m.q[(0, 0)], 1.0);
        assert_abs_diff_eq!(m.q[(1, 1)], 1.0 - 0.1 * g.b, epsilon = 1e-16);
        assert_eq!(spectral_radius(&m), 1.0);
    }

    #[test]
    fn bipartite_mode_at_tenth_second() {
        let h = 0.1;
        let g = unit_gains(h);
        let m = ModeMatrix::new(&g, h, 2.0);
        let want = (1.0 + h.powi(4) / 4.0) / (1.0 + h * h + h.powi(4) / 4.0);
        assert_abs_diff_eq!(m.det(), want, epsilon = 1e-15);
        assert_abs_diff_eq!(m.det(), 0.990100, epsilon = 1e-6);
        let disc = m.trace().powi(2) - 4.0 * m.det();
        assert!(disc < 0.0 && (disc + 3.0e-4).abs() < 0.1e-4, "{disc}");
        assert_abs_diff_eq!(spectral_radius(&m), 0.995038, epsilon = 1e-6);
    }

    #[test]
    fn formulas_match_matrix() {
        let g = GainPair::new(&Weights::new(2.0, 0.5, 0.3), 0.2).unwrap();
        for l in [0.0, 0.3, 1.0, 1.7, 2.0] {
            let m = ModeMatrix::new(&g, 0.2, l);
            assert_abs_diff_eq!(m.trace(), ModeMatrix::trace_formula(&g, 0.2, l), epsilon = 1e-15);
            assert_abs_diff_eq!(m.det(), ModeMatrix::det_formula(&g, 0.2, l), epsilon = 1e-15);
        }
    }

    #[test]
    fn radius_matches_generic_eigenvalues() {
        for (w, h, l) in [
            ((1.0, 1.0, 1.0), 0.1, 2.0),
            ((50.0, 1.0, 0.01), 0.5, 1.0),
            ((1.0, 3.0, 1.0), 1.0, 0.4),
        ] {
            let g = GainPair::new(&Weights::new(w.0, w.1, w.2), h).unwrap();
            let m = ModeMatrix::new(&g, h, l);
            let eig = m.q.complex_eigenvalues();
            let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert_abs_diff_eq!(spectral_radius(&m), rho, epsilon = 1e-12);
        }
    }

    #[test]
    fn tiny_step_tends_to_identity() {
        let g = unit_gains(1e-6);
        for l in [0.5, 1.0, 2.0] {
            let rho = spectral_radius(&ModeMatrix::new(&g, 1e-6, l));
            assert!((rho - 1.0).abs() < 1e-4);
        }
    }
}
