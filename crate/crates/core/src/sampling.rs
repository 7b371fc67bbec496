//! Independent multivariate Gaussian sampling family.
//!
//! The search distribution is `N(mean, diag(variance))`, an exponential family
//! with sufficient statistic `Γ(x) = (x_1, .., x_D, x_1², .., x_D²)` and natural
//! parameter `(mean / variance, -1 / (2 variance))`. Vectors of length `2D` are
//! always laid out as all first-order entries followed by all second-order ones.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moment view of the sampling distribution: per-coordinate mean and variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

/// Natural-parameter view: `eta1 = mean / variance`, `eta2 = -1 / (2 variance)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalParams {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
}

/// Componentwise box on `(mean, variance)`; the compact convex constraint set
/// the projected update maps back into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBox {
    mean_lo: Vec<f64>,
    mean_hi: Vec<f64>,
    var_lo: Vec<f64>,
    var_hi: Vec<f64>,
}

impl SamplingParams {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::input("sampling distribution needs at least one coordinate"));
        }
        if mean.len() != variance.len() {
            return Err(Error::input(format!(
                "mean has length {} but variance has length {}",
                mean.len(),
                variance.len()
            )));
        }
        if mean.iter().chain(&variance).any(|v| !v.is_finite()) {
            return Err(Error::input("sampling parameters must be finite"));
        }
        if let Some(v) = variance.iter().find(|&&v| v <= 0.0) {
            return Err(Error::InvalidParameter(format!("variance {v} is not positive")));
        }
        Ok(SamplingParams { mean, variance })
    }

    /// `N(mean, variance · I)`.
    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, vec![variance; d])
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// `E[Γ(x)] = (μ, μ² + σ²)` in closed form.
    pub fn expected_sufficient_statistics(&self) -> Vec<f64> {
        let second = self
            .mean
            .iter()
            .zip(&self.variance)
            .map(|(m, v)| m * m + v);
        self.mean.iter().copied().chain(second).collect()
    }

    /// Draws a single point.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.variance)
            .map(|(m, v)| {
                let z: f64 = rng.sample(StandardNormal);
                m + v.sqrt() * z
            })
            .collect()
    }

    /// Draws `n` independent points, consuming `rng` in draw order.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn to_natural(&self) -> NaturalParams {
        NaturalParams {
            eta1: self
                .mean
                .iter()
                .zip(&self.variance)
                .map(|(m, v)| m / v)
                .collect(),
            eta2: self.variance.iter().map(|v| -0.5 / v).collect(),
        }
    }

    pub fn from_natural(nat: &NaturalParams) -> Result<Self> {
        nat.check_lengths()?;
        if let Some(e) = nat.eta2.iter().find(|&&e| !(e < 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "second natural parameter {e} is not negative"
            )));
        }
        let variance: Vec<f64> = nat.eta2.iter().map(|e| -0.5 / e).collect();
        let mean = nat.eta1.iter().zip(&variance).map(|(e, v)| e * v).collect();
        Self::new(mean, variance)
    }
}

impl NaturalParams {
    pub fn dimension(&self) -> usize {
        self.eta1.len()
    }

    /// Flat `2D` vector `(eta1, eta2)`, matching the layout of `Γ(x)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.eta1.iter().chain(&self.eta2).copied().collect()
    }

    pub fn from_vec(theta: &[f64]) -> Result<Self> {
        if theta.is_empty() || theta.len() % 2 != 0 {
            return Err(Error::input(format!(
                "natural parameter vector has odd or zero length {}",
                theta.len()
            )));
        }
        let (eta1, eta2) = theta.split_at(theta.len() / 2);
        Ok(NaturalParams {
            eta1: eta1.to_vec(),
            eta2: eta2.to_vec(),
        })
    }

    fn check_lengths(&self) -> Result<()> {
        if self.eta1.is_empty() || self.eta1.len() != self.eta2.len() {
            return Err(Error::input(format!(
                "natural parameter halves have lengths {} and {}",
                self.eta1.len(),
                self.eta2.len()
            )));
        }
        Ok(())
    }
}

impl ProjectionBox {
    pub fn new(mean_lo: Vec<f64>, mean_hi: Vec<f64>, var_lo: Vec<f64>, var_hi: Vec<f64>) -> Result<Self> {
        let d = mean_lo.len();
        if d == 0 || mean_hi.len() != d || var_lo.len() != d || var_hi.len() != d {
            return Err(Error::input("projection box bounds must share a nonzero length"));
        }
        for i in 0..d {
            let (ml, mh, vl, vh) = (mean_lo[i], mean_hi[i], var_lo[i], var_hi[i]);
            if ![ml, mh, vl, vh].iter().all(|v| v.is_finite()) {
                return Err(Error::input("projection box bounds must be finite"));
            }
            if ml > mh {
                return Err(Error::input(format!("mean bounds [{ml}, {mh}] are empty at coordinate {i}")));
            }
            if !(vl > 0.0 && vl <= vh) {
                return Err(Error::input(format!(
                    "variance bounds [{vl}, {vh}] must satisfy 0 < lo <= hi at coordinate {i}"
                )));
            }
        }
        Ok(ProjectionBox { mean_lo, mean_hi, var_lo, var_hi })
    }

    /// Same bounds in every coordinate.
    pub fn uniform(dimension: usize, mean: (f64, f64), variance: (f64, f64)) -> Result<Self> {
        Self::new(
            vec![mean.0; dimension],
            vec![mean.1; dimension],
            vec![variance.0; dimension],
            vec![variance.1; dimension],
        )
    }

    pub fn dimension(&self) -> usize {
        self.mean_lo.len()
    }

    pub fn contains(&self, params: &SamplingParams) -> bool {
        (0..self.dimension()).all(|d| {
            let (m, v) = (params.mean[d], params.variance[d]);
            m >= self.mean_lo[d] && m <= self.mean_hi[d] && v >= self.var_lo[d] && v <= self.var_hi[d]
        })
    }

    /// Clamps a moment-view point into the box.
    pub fn clamp(&self, params: &SamplingParams) -> SamplingParams {
        let d = self.dimension();
        let mean = (0..d)
            .map(|i| params.mean[i].clamp(self.mean_lo[i], self.mean_hi[i]))
            .collect();
        let variance = (0..d)
            .map(|i| params.variance[i].clamp(self.var_lo[i], self.var_hi[i]))
            .collect();
        SamplingParams { mean, variance }
    }

    /// Projects an arbitrary natural-parameter point into the box, returning the
    /// moment view.
    ///
    /// Coordinates with `eta2 >= 0` (outside the natural parameter space, i.e.
    /// unbounded spread) take the maximal variance `var_hi` and the mean
    /// `eta1 · var_hi` before clamping.
    pub fn project_to_moments(&self, nat: &NaturalParams) -> Result<SamplingParams> {
        nat.check_lengths()?;
        if nat.dimension() != self.dimension() {
            return Err(Error::input(format!(
                "parameter dimension {} does not match box dimension {}",
                nat.dimension(),
                self.dimension()
            )));
        }
        let d = self.dimension();
        let mut mean = Vec::with_capacity(d);
        let mut variance = Vec::with_capacity(d);
        for i in 0..d {
            let (e1, e2) = (nat.eta1[i], nat.eta2[i]);
            let (raw_mean, raw_var) = if e2 < 0.0 {
                let v = -0.5 / e2;
                (e1 * v, v)
            } else {
                (e1 * self.var_hi[i], self.var_hi[i])
            };
            let raw_mean = if raw_mean.is_nan() {
                0.5 * (self.mean_lo[i] + self.mean_hi[i])
            } else {
                raw_mean
            };
            let raw_var = if raw_var.is_nan() { self.var_hi[i] } else { raw_var };
            mean.push(raw_mean.clamp(self.mean_lo[i], self.mean_hi[i]));
            variance.push(raw_var.clamp(self.var_lo[i], self.var_hi[i]));
        }
        Ok(SamplingParams { mean, variance })
    }

    /// Projection in natural coordinates: convert to `(mean, variance)`, clamp,
    /// convert back.
    pub fn project(&self, nat: &NaturalParams) -> Result<NaturalParams> {
        Ok(self.project_to_moments(nat)?.to_natural())
    }
}

/// `Γ(x) = (x, x²)` for the independent Gaussian family.
pub fn sufficient_statistics(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("sufficient statistics of a non-finite point"));
    }
    Ok(x.iter().copied().chain(x.iter().map(|v| v * v)).collect())
}
