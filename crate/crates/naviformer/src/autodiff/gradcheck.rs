//! Finite-difference gradient verification.
//!
//! Verification utility only: nothing in the forward/backward machinery
//! depends on it. Checks run in f64, where central differences are reliable.

/// Central-difference gradient of `f` at `x` with perturbation `h`.
pub fn finite_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let fp = f(&probe);
        probe[i] = orig - h;
        let fm = f(&probe);
        probe[i] = orig;
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

/// Worst relative disagreement between analytic and numeric gradients.
#[derive(Debug, Clone, Copy)]
pub struct CheckOutcome {
    pub max_rel: f64,
    pub worst_index: usize,
}

/// Relative error per coordinate. Components far below the gradient's own
/// scale are floored to one percent of that scale: central differences
/// carry an absolute truncation error, so a pure per-component ratio would
/// reject gradients whose tiny components are exact to within that noise.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> CheckOutcome {
    assert_eq!(analytic.len(), numeric.len());
    let scale = analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| a.abs().max(n.abs()))
        .fold(0.0f64, f64::max);
    let floor = (scale * 1e-2).max(1e-8);
    let mut max_rel = 0.0;
    let mut worst_index = 0;
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let denom = a.abs().max(n.abs()).max(floor);
        let rel = (a - n).abs() / denom;
        if rel > max_rel {
            max_rel = rel;
            worst_index = i;
        }
    }
    CheckOutcome {
        max_rel,
        worst_index,
    }
}
