//! Noisy benchmark losses `l_i(x, ξ) = L_i(x) + s_i(x) · N(0, 1)`.
//!
//! The noise scale `s_i(x) = sqrt(1 + 100 Σ_d (x_d - c)²)` is centred at `c = 1`
//! for L0, Powell, Rastrigin and Pintér and at `c = 2` for Rosenbrock and Levy.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::risk::{standard_normal_cvar, LossSampleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkId {
    L0,
    Powell,
    Rosenbrock,
    Rastrigin,
    Pinter,
    Levy,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 6] = [
        BenchmarkId::L0,
        BenchmarkId::Powell,
        BenchmarkId::Rosenbrock,
        BenchmarkId::Rastrigin,
        BenchmarkId::Pinter,
        BenchmarkId::Levy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkId::L0 => "L0",
            BenchmarkId::Powell => "Powell",
            BenchmarkId::Rosenbrock => "Rosenbrock",
            BenchmarkId::Rastrigin => "Rastrigin",
            BenchmarkId::Pinter => "Pinter",
            BenchmarkId::Levy => "Levy",
        }
    }

    /// Centre of the noise term.
    pub fn noise_center(&self) -> f64 {
        match self {
            BenchmarkId::Rosenbrock | BenchmarkId::Levy => 2.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    /// Accepts the names above (case-insensitive) and the indices `L0`..`L5`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let id = match lower.as_str() {
            "l0" | "sphere" => BenchmarkId::L0,
            "l1" | "powell" => BenchmarkId::Powell,
            "l2" | "rosenbrock" => BenchmarkId::Rosenbrock,
            "l3" | "rastrigin" => BenchmarkId::Rastrigin,
            "l4" | "pinter" => BenchmarkId::Pinter,
            "l5" | "levy" => BenchmarkId::Levy,
            _ => return Err(Error::input(format!("unknown benchmark `{s}`"))),
        };
        Ok(id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    id: BenchmarkId,
    dimension: usize,
}

impl BenchmarkSpec {
    pub fn new(id: BenchmarkId, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::input("benchmark dimension must be at least 1"));
        }
        if id == BenchmarkId::Powell && dimension < 4 {
            return Err(Error::input(format!(
                "Powell needs dimension >= 4, got {dimension}"
            )));
        }
        Ok(BenchmarkSpec { id, dimension })
    }

    pub fn id(&self) -> BenchmarkId {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::input(format!(
                "{} expects a point of dimension {}, got {}",
                self.id,
                self.dimension,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("benchmark point must be finite"));
        }
        Ok(())
    }

    /// `L_i(x)`, the noise-free mean loss.
    pub fn deterministic_loss(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match self.id {
            BenchmarkId::L0 => x.iter().map(|v| v * v).sum(),
            BenchmarkId::Powell => powell(x),
            BenchmarkId::Rosenbrock => rosenbrock(x),
            BenchmarkId::Rastrigin => rastrigin(x),
            BenchmarkId::Pinter => pinter(x),
            BenchmarkId::Levy => levy(x),
        })
    }

    /// Standard deviation of the additive Gaussian noise at `x`.
    pub fn noise_scale(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let c = self.id.noise_center();
        let ss: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
        Ok((1.0 + 100.0 * ss).sqrt())
    }

    pub fn simulate_loss(&self, x: &[f64], m: usize, rng: &mut dyn RngCore) -> Result<LossSampleSet> {
        if m == 0 {
            return Err(Error::input("requested zero loss draws"));
        }
        let mean = self.deterministic_loss(x)?;
        let scale = self.noise_scale(x)?;
        let losses = (0..m)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                mean + scale * z
            })
            .collect();
        LossSampleSet::new(losses)
    }
}

impl LossModel for BenchmarkSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn deterministic_value(&self, x: &[f64]) -> Option<f64> {
        self.deterministic_loss(x).ok()
    }

    fn simulate(&self, x: &[f64], m: usize, rng: &mut dyn RngCore) -> Result<LossSampleSet> {
        self.simulate_loss(x, m, rng)
    }

    /// Every benchmark loss is Gaussian at fixed `x`, so its CVaR is exact.
    fn cvar_oracle(&self, x: &[f64], alpha: f64) -> Option<f64> {
        let mean = self.deterministic_loss(x).ok()?;
        let scale = self.noise_scale(x).ok()?;
        Some(mean + scale * standard_normal_cvar(alpha).ok()?)
    }
}

fn powell(x: &[f64]) -> f64 {
    // 0-based window (x[i-1], x[i], x[i+1], x[i+2]) for i = 1..=D-3
    (1..x.len() - 2)
        .map(|i| {
            let (a, b, c, d) = (x[i - 1], x[i], x[i + 1], x[i + 2]);
            (a + 10.0 * b).powi(2) + 5.0 * (c - d).powi(2) + (b - 2.0 * c).powi(4) + 10.0 * (a - d).powi(4)
        })
        .sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| (w[0] - 1.0).powi(2) + 100.0 * (w[0] * w[0] - w[1]).powi(2))
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>() - 10.0 * d - 1.0
}

/// Neighbours wrap around: `x_0 = x_D` and `x_{D+1} = x_1`.
fn pinter(x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let w = (i + 1) as f64;
        let prev = x[(i + n - 1) % n];
        let next = x[(i + 1) % n];
        let xi = x[i];
        let a = prev * xi.sin() - xi + next.sin();
        let b = prev * prev - 2.0 * xi + 3.0 * next - xi.cos() + 1.0;
        total += w * xi * xi + 20.0 * w * a.sin().powi(2) + w * (1.0 + w * b * b).log10();
    }
    total
}

fn levy(x: &[f64]) -> f64 {
    let y: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let last = y[y.len() - 1];
    let body: f64 = y[..y.len() - 1]
        .iter()
        .map(|&yd| (yd - 1.0).powi(2) * (1.0 + 10.0 * (PI * yd + 1.0).sin().powi(2)))
        .sum();
    -(PI * y[0]).sin().powi(2) - body - (last - 1.0).powi(2) * (1.0 + 10.0 * (2.0 * PI * last).sin().powi(2))
}

/// Exact CVaR of `l_0` at `x`: `Σ x_d² + s_0(x) · φ(z_α) / (1 - α)`.
pub fn l0_cvar_oracle(x: &[f64], alpha: f64) -> Result<f64> {
    let spec = BenchmarkSpec::new(BenchmarkId::L0, x.len())?;
    Ok(spec.deterministic_loss(x)? + spec.noise_scale(x)? * standard_normal_cvar(alpha)?)
}

/// Minimiser and minimum of the `l_0` CVaR.
///
/// The objective is convex and permutation symmetric, so the minimiser lies on
/// the diagonal `x = (t, .., t)`; `t` is located by a dense grid on
/// `[-0.5, 1.5]` followed by golden-section refinement.
pub fn l0_min_cvar_oracle(dimension: usize, alpha: f64) -> Result<(Vec<f64>, f64)> {
    if dimension == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    let c = standard_normal_cvar(alpha)?;
    let d = dimension as f64;
    let f = |t: f64| d * t * t + (1.0 + 100.0 * d * (t - 1.0).powi(2)).sqrt() * c;

    const GRID: usize = 100_000;
    let (lo, hi) = (-0.5, 1.5);
    let step = (hi - lo) / GRID as f64;
    let best = (0..=GRID)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(0.0);

    let (mut a, mut b) = (best - step, best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let c1 = b - inv_phi * (b - a);
        let c2 = a + inv_phi * (b - a);
        if f(c1) <= f(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    let t = if alpha == 0.0 { 0.0 } else { 0.5 * (a + b) };
    let x = vec![t; dimension];
    let value = l0_cvar_oracle(&x, alpha)?;
    Ok((x, value))
}
