use nalgebra::{DMatrix, DVector};

use super::AnalysisError;
use crate::graph::SpectralDecomposition;
use crate::scalar::Real;
use crate::solver::GainPair;

/// `A = [[I − (ah²/2)D⁻¹L, (h − bh²/2)I], [−ahD⁻¹L, (1 − bh)I]]` acting on
/// the stacked slot-one predictions `(𝚫, 𝚫̇)`.
pub fn closed_loop_matrix<T: Real>(random_walk: &DMatrix<T>, gains: &GainPair<T>, h: T) -> DMatrix<T> {
    let n = random_walk.nrows();
    let half_h2 = h * h * T::lit(0.5);
    let eye = DMatrix::<T>::identity(n, n);
    let mut a = DMatrix::<T>::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n))
        .copy_from(&(&eye - random_walk * (gains.a * half_h2)));
    a.view_mut((0, n), (n, n)).copy_from(&(&eye * (h - gains.b * half_h2)));
    a.view_mut((n, 0), (n, n)).copy_from(&(random_walk * (-gains.a * h)));
    a.view_mut((n, n), (n, n)).copy_from(&(&eye * (T::one() - gains.b * h)));
    a
}

/// Closed-loop states `k = 0..=steps` and their modal coordinates `V⁻¹x`.
#[derive(Debug, Clone)]
pub struct ClosedLoopTrace<T: Real> {
    pub delta: Vec<DVector<T>>,
    pub rate: Vec<DVector<T>>,
    pub modal_delta: Vec<DVector<T>>,
    pub modal_rate: Vec<DVector<T>>,
}

/// Iterates the affine recursion from `(𝚫⁰, 𝚫̇⁰)`. `alpha[k]` is the
/// correction received at step `k+1`; forcing enters as
/// `[(ah²/2 − 1)α; ahα]`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_closed_loop<T: Real>(
    random_walk: &DMatrix<T>,
    spectral: &SpectralDecomposition<T>,
    gains: &GainPair<T>,
    h: T,
    delta0: &DVector<T>,
    rate0: &DVector<T>,
    alpha: &[DVector<T>],
    steps: usize,
) -> Result<ClosedLoopTrace<T>, AnalysisError> {
    let n = random_walk.nrows();
    if alpha.len() < steps {
        return Err(AnalysisError::Length {
            what: "alpha sequence",
            got: alpha.len(),
            want: steps,
        });
    }
    for (what, v) in [("initial deviations", delta0), ("initial rates", rate0)] {
        if v.len() != n {
            return Err(AnalysisError::Length {
                what,
                got: v.len(),
                want: n,
            });
        }
    }
    let a = closed_loop_matrix(random_walk, gains, h);
    let f_delta = gains.a * h * h * T::lit(0.5) - T::one();
    let f_rate = gains.a * h;
    let mut x = DVector::<T>::zeros(2 * n);
    x.rows_mut(0, n).copy_from(delta0);
    x.rows_mut(n, n).copy_from(rate0);
    let mut trace = ClosedLoopTrace {
        delta: Vec::with_capacity(steps + 1),
        rate: Vec::with_capacity(steps + 1),
        modal_delta: Vec::with_capacity(steps + 1),
        modal_rate: Vec::with_capacity(steps + 1),
    };
    let mut record = |x: &DVector<T>| {
        let d = x.rows(0, n).into_owned();
        let r = x.rows(n, n).into_owned();
        trace.modal_delta.push(&spectral.inverse * &d);
        trace.modal_rate.push(&spectral.inverse * &r);
        trace.delta.push(d);
        trace.rate.push(r);
    };
    record(&x);
    for al in alpha.iter().take(steps) {
        let mut next = &a * &x;
        for i in 0..n {
            next[i] += f_delta * al[i];
            next[n + i] += f_rate * al[i];
        }
        x = next;
        record(&x);
    }
    Ok(trace)
}
