use nalgebra::{DMatrix, DVector};

use super::{CondensedQp, SolverError};
use crate::mpc::SolverOptions;
use crate::scalar::Real;

/// Optimal control sequence and solver diagnostics.
#[derive(Debug, Clone)]
pub struct QpSolution<T: Real> {
    pub u: DVector<T>,
    /// Indices into `CondensedQp::constraints`, ascending.
    pub active: Vec<usize>,
    /// Multipliers aligned with `active`.
    pub multipliers: Vec<T>,
    pub iterations: usize,
    pub kkt_residual: T,
    pub max_violation: T,
    pub objective: T,
}

/// Primal active-set method started from a feasible point with an empty
/// working set.
///
/// Each iteration solves the equality-constrained subproblem on the working
/// set. A zero step with all multipliers nonnegative terminates; otherwise
/// the most negative multiplier leaves (lowest index on ties) or the step is
/// cut at the first blocking constraint (lowest index on ties), which joins.
pub fn solve_qp<T: Real>(qp: &CondensedQp<T>, opts: &SolverOptions<T>) -> Result<QpSolution<T>, SolverError> {
    let k = qp.horizon();
    let cap = opts.iteration_cap(k);
    let mut x = qp.feasible_start();
    let mut working: Vec<usize> = Vec::new();
    let mut best: Option<(T, DVector<T>, T)> = None;

    for iter in 1..=cap {
        let (p, mu) = equality_step(qp, &x, &working)?;
        // KKT round-off grows with the horizon; a step this small is noise.
        let scale = T::one().max(x.amax());
        if p.amax() <= T::default_epsilon().sqrt() * T::lit(1e-2) * scale {
            let residual = stationarity(qp, &x, &working, &mu);
            if best.as_ref().is_none_or(|b| residual < b.2) {
                best = Some((qp.objective(&x), x.clone(), residual));
            }
            let worst = mu
                .iter()
                .enumerate()
                .fold(None, |acc: Option<(usize, T)>, (pos, &m)| match acc {
                    Some((_, v)) if m >= v => acc,
                    _ => Some((pos, m)),
                });
            match worst {
                Some((pos, m)) if m < -opts.kkt_tolerance => {
                    working.remove(pos);
                }
                _ => return Ok(finish(qp, x, working, mu, iter)),
            }
        } else {
            let mut step = T::one();
            let mut blocking = None;
            for (i, c) in qp.constraints.iter().enumerate() {
                if working.contains(&i) {
                    continue;
                }
                let ap = c.row.dot(&p);
                // rows dependent on the working set see only round-off here
                let noise = c
                    .row
                    .iter()
                    .zip(p.iter())
                    .fold(T::zero(), |acc, (r, q)| acc + (*r * *q).abs());
                if ap > noise * T::default_epsilon() * T::lit(1e3) {
                    let t = ((c.bound - c.row.dot(&x)) / ap).max(T::zero());
                    if t < step && !dependent(qp, &working, i) {
                        step = t;
                        blocking = Some(i);
                    }
                }
            }
            x += p * step;
            if let Some(i) = blocking {
                let pos = working.partition_point(|&w| w < i);
                working.insert(pos, i);
            }
        }
    }
    let (_, best_x, residual) = best.unwrap_or_else(|| (T::zero(), x.clone(), T::infinity()));
    Err(SolverError::IterationCap {
        cap,
        best: best_x.iter().map(|v| v.as_f64()).collect(),
        residual: residual.as_f64(),
    })
}

/// Solves `[H Aᵀ; A 0][p; μ] = [−(Hx+g); 0]` on the working set.
fn equality_step<T: Real>(
    qp: &CondensedQp<T>,
    x: &DVector<T>,
    working: &[usize],
) -> Result<(DVector<T>, Vec<T>), SolverError> {
    let k = qp.horizon();
    let m = working.len();
    let mut kkt = DMatrix::<T>::zeros(k + m, k + m);
    kkt.view_mut((0, 0), (k, k)).copy_from(&qp.hessian);
    for (r, &i) in working.iter().enumerate() {
        let row = &qp.constraints[i].row;
        for c in 0..k {
            kkt[(k + r, c)] = row[c];
            kkt[(c, k + r)] = row[c];
        }
    }
    let grad = &qp.hessian * x + &qp.gradient;
    let mut rhs = DVector::<T>::zeros(k + m);
    rhs.rows_mut(0, k).copy_from(&(-grad));
    let sol = kkt.lu().solve(&rhs).ok_or(SolverError::SingularKkt(m))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::SingularKkt(m));
    }
    let p = sol.rows(0, k).into_owned();
    let mu = sol.rows(k, m).iter().copied().collect();
    Ok((p, mu))
}

/// True when constraint `i` lies in the span of the working rows. Such a row
/// is unchanged by any step the working set allows, and adding it would make
/// the KKT matrix singular.
fn dependent<T: Real>(qp: &CondensedQp<T>, working: &[usize], i: usize) -> bool {
    if working.is_empty() {
        return false;
    }
    let k = qp.horizon();
    if working.len() >= k {
        return true;
    }
    let rows = working.len() + 1;
    let mut m = DMatrix::<T>::zeros(k, rows);
    for (c, &w) in working.iter().chain(std::iter::once(&i)).enumerate() {
        let row = &qp.constraints[w].row;
        let norm = row.norm();
        m.set_column(c, &(row / norm));
    }
    let sv = m.singular_values();
    let min = sv
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    min <= T::default_epsilon().sqrt() * T::lit(1e-2)
}

fn stationarity<T: Real>(qp: &CondensedQp<T>, x: &DVector<T>, working: &[usize], mu: &[T]) -> T {
    let mut r = &qp.hessian * x + &qp.gradient;
    for (&i, &m) in working.iter().zip(mu) {
        r += &qp.constraints[i].row * m;
    }
    r.amax()
}

fn finish<T: Real>(
    qp: &CondensedQp<T>,
    x: DVector<T>,
    working: Vec<usize>,
    mu: Vec<T>,
    iterations: usize,
) -> QpSolution<T> {
    QpSolution {
        kkt_residual: stationarity(qp, &x, &working, &mu),
        max_violation: qp.max_violation(&x),
        objective: qp.objective(&x),
        u: x,
        active: working,
        multipliers: mu,
        iterations,
    }
}
