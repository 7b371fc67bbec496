//! The loss-model handle consumed by the search engines.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::risk::LossSampleSet;

/// A stochastic loss `l(x, ξ_x)` that can be simulated at any point.
pub trait LossModel: Sync {
    fn dimension(&self) -> usize;

    /// `E[l(x, ξ_x)]` when it is known in closed form.
    fn deterministic_value(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// `m` i.i.d. loss draws at `x`.
    fn simulate(&self, x: &[f64], m: usize, rng: &mut dyn RngCore) -> Result<LossSampleSet>;

    /// Exact CVaR at `alpha`, when the loss distribution is analytically known.
    fn cvar_oracle(&self, _x: &[f64], _alpha: f64) -> Option<f64> {
        None
    }
}

/// A zero-noise loss: every draw equals `f(x)`.
pub struct Noiseless<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Noiseless<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Noiseless { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> LossModel for Noiseless<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn deterministic_value(&self, x: &[f64]) -> Option<f64> {
        Some((self.f)(x))
    }

    fn simulate(&self, x: &[f64], m: usize, _rng: &mut dyn RngCore) -> Result<LossSampleSet> {
        if m == 0 {
            return Err(Error::input("requested zero loss draws"));
        }
        LossSampleSet::new(vec![(self.f)(x); m])
    }

    fn cvar_oracle(&self, x: &[f64], _alpha: f64) -> Option<f64> {
        Some((self.f)(x))
    }
}
