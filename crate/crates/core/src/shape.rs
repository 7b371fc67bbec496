//! Logistic level-set shape function and the elite quantile threshold.
//!
//! Scores are in maximization orientation: the engines pass `-Ĉ_α(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{ceil_index, order_statistic};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeConfig {
    s_o: f64,
    rho: f64,
}

impl ShapeConfig {
    /// `s_o` is the logistic steepness, `rho` the elite fraction.
    pub fn new(s_o: f64, rho: f64) -> Result<Self> {
        if !(s_o.is_finite() && s_o > 0.0) {
            return Err(Error::input(format!("shape steepness {s_o} must be finite and positive")));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::input(format!("elite fraction {rho} is outside (0, 1]")));
        }
        Ok(ShapeConfig { s_o, rho })
    }

    pub fn s_o(&self) -> f64 {
        self.s_o
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Shape values of every score against the sample `(1 - rho)`-quantile.
    pub fn shape_all(&self, scores: &[f64]) -> Result<Vec<f64>> {
        let gamma = sample_quantile_threshold(scores, self.rho)?;
        Ok(scores.iter().map(|&s| shape(s, gamma, self)).collect())
    }
}

/// The `j`-th order statistic of `scores`, `j = max(1, ⌈(1 - rho) N⌉)`.
pub fn sample_quantile_threshold(scores: &[f64], rho: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::input("quantile threshold of an empty score vector"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::input("scores contain NaN"));
    }
    Ok(order_statistic(scores, ceil_index(1.0 - rho, scores.len())))
}

/// `1 / (1 + exp(-s_o (score - gamma)))`, evaluated so that `exp` only ever
/// sees nonpositive arguments.
pub fn shape(score: f64, gamma: f64, config: &ShapeConfig) -> f64 {
    let t = config.s_o * (score - gamma);
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_fixtures() {
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(sample_quantile_threshold(&s, 0.1).unwrap(), 9.0);
        assert_eq!(sample_quantile_threshold(&[2.5; 7], 0.1).unwrap(), 2.5);
        assert_eq!(sample_quantile_threshold(&[4.0, 2.0], 1.0).unwrap(), 2.0);
        assert!(sample_quantile_threshold(&[], 0.1).is_err());
    }

    #[test]
    fn shape_fixtures() {
        let c = ShapeConfig::new(1.0, 0.1).unwrap();
        assert_eq!(shape(3.0, 3.0, &c), 0.5);
        assert!((shape(3f64.ln(), 0.0, &c) - 0.75).abs() < 1e-15);
        let steep = ShapeConfig::new(1e5, 0.1).unwrap();
        let low = shape(-1.0, 0.0, &steep);
        assert!(low >= 0.0 && low < 1e-300);
        assert_eq!(shape(1.0, 0.0, &steep), 1.0);
        assert!(!shape(-1e300, 1e300, &steep).is_nan());
    }

    #[test]
    fn config_validation() {
        assert!(ShapeConfig::new(0.0, 0.1).is_err());
        assert!(ShapeConfig::new(f64::INFINITY, 0.1).is_err());
        assert!(ShapeConfig::new(1.0, 0.0).is_err());
        assert!(ShapeConfig::new(1.0, 1.5).is_err());
        assert!(ShapeConfig::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn elite_fraction_receives_weight() {
        let c = ShapeConfig::new(1e5, 0.1).unwrap();
        let scores: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 * 0.37).collect();
        let shaped = c.shape_all(&scores).unwrap();
        let elite = shaped.iter().filter(|&&s| s >= 0.5).count();
        assert!((elite as i64 - 100).abs() <= 1, "elite count {elite}");
    }

    proptest! {
        #[test]
        fn shape_is_monotone_and_bounded(a in -1e3f64..1e3, b in -1e3f64..1e3, gamma in -1e3f64..1e3, s_o in 1e-3f64..1e6) {
            let c = ShapeConfig::new(s_o, 0.5).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (sl, sh) = (shape(lo, gamma, &c), shape(hi, gamma, &c));
            prop_assert!(sl <= sh);
            prop_assert!((0.0..=1.0).contains(&sl) && (0.0..=1.0).contains(&sh));
        }

        #[test]
        fn threshold_is_permutation_invariant(mut v in prop::collection::vec(-50f64..50.0, 1..80), rho in 0.01f64..1.0) {
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let j = ceil_index(1.0 - rho, v.len());
            let t = sample_quantile_threshold(&v, rho).unwrap();
            prop_assert_eq!(t, sorted[j - 1]);
            v.reverse();
            prop_assert_eq!(sample_quantile_threshold(&v, rho).unwrap(), t);
        }
    }
}
