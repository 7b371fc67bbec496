//! Order-statistic index helpers shared by the CVaR and quantile estimators.

use std::cmp::Ordering;

/// `⌈fraction · n⌉` clamped to `[1, n]`.
///
/// Products within a few ulps of an integer are treated as that integer, so
/// decimal levels such as `0.95 · 600` index the intended order statistic.
pub(crate) fn ceil_index(fraction: f64, n: usize) -> usize {
    let product = fraction * n as f64;
    let nearest = product.round();
    let c = if (product - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        product.ceil()
    };
    (c.max(1.0) as usize).min(n)
}

/// `⌈numerator / denominator⌉` with the same near-integer snapping as
/// [`ceil_index`].
pub(crate) fn ceil_ratio(numerator: f64, denominator: f64) -> f64 {
    let q = numerator / denominator;
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        q.ceil()
    }
}

/// The `j`-th smallest value (1-based) of `values`.
pub(crate) fn order_statistic(values: &[f64], j: usize) -> f64 {
    debug_assert!(j >= 1 && j <= values.len());
    let mut scratch = values.to_vec();
    let (_, nth, _) = scratch.select_nth_unstable_by(j - 1, cmp_f64);
    *nth
}

pub(crate) fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.total_cmp(b)
}
