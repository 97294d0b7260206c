/// Least-squares slope of `ln(y_k)` against `k`, i.e. the fitted
/// per-step log decay rate. Nonpositive samples are skipped; `None` when
/// fewer than two remain.
pub fn fit_log_rate(values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `max_{i,j} |x_i − x_j|`.
pub fn max_pairwise_gap(xs: &[f64]) -> f64 {
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_geometric_rate() {
        let ys: Vec<f64> = (0..50).map(|k| 3.0 * 0.9f64.powi(k)).collect();
        assert!((fit_log_rate(&ys).unwrap() - 0.9f64.ln()).abs() < 1e-12);
        assert_eq!(fit_log_rate(&[1.0]), None);
        assert_eq!(max_pairwise_gap(&[1.0, -2.0, 0.5]), 3.0);
        assert_eq!(max_pairwise_gap(&[]), 0.0);
    }
}
