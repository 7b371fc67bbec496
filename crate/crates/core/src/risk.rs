//! Empirical VaR and CVaR from i.i.d. loss samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::order::{ceil_index, order_statistic};

/// Simulated losses `l(x, ξ^1), .., l(x, ξ^M)` in simulation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSampleSet {
    losses: Vec<f64>,
}

impl LossSampleSet {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        if losses.is_empty() {
            return Err(Error::input("loss sample set is empty"));
        }
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::input("loss samples must be finite"));
        }
        Ok(LossSampleSet { losses })
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    /// Arithmetic mean, kept inside `[min, max]` against rounding.
    pub fn mean(&self) -> f64 {
        let (lo, hi) = self
            .losses
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        (self.losses.iter().sum::<f64>() / self.len() as f64).clamp(lo, hi)
    }

    pub fn var(&self, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        Ok(order_statistic(&self.losses, ceil_index(alpha, self.len())))
    }

    pub fn cvar(&self, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        if alpha == 0.0 {
            // j = 1 makes the tail sum telescope to the sample mean.
            return Ok(self.mean());
        }
        let v = self.var(alpha)?;
        let excess: f64 = self.losses.iter().map(|&l| (l - v).max(0.0)).sum();
        Ok(v + excess / (self.len() as f64 * (1.0 - alpha)))
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::input(format!("risk level {alpha} is outside [0, 1)")));
    }
    Ok(())
}

/// Order statistic `l_(j)` with `j = max(1, ⌈αM⌉)`.
pub fn empirical_var(samples: &LossSampleSet, alpha: f64) -> Result<f64> {
    samples.var(alpha)
}

/// `V̂ + Σ (l_m - V̂)⁺ / (M (1 - α))`, the CVaR of the empirical loss distribution.
pub fn empirical_cvar(samples: &LossSampleSet, alpha: f64) -> Result<f64> {
    samples.cvar(alpha)
}

/// Standard normal tail factor `φ(z_α) / (1 - α)`: the CVaR of `N(0, 1)` at `α`.
pub fn standard_normal_cvar(alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let n = Normal::standard();
    Ok(n.pdf(n.inverse_cdf(alpha)) / (1.0 - alpha))
}

/// Exact CVaR of `N(mu, sigma²)` at level `alpha`.
pub fn gaussian_cvar_oracle(mu: f64, sigma: f64, alpha: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::input(format!("standard deviation {sigma} is negative")));
    }
    let factor = standard_normal_cvar(alpha)?;
    Ok(if sigma == 0.0 { mu } else { mu + sigma * factor })
}
