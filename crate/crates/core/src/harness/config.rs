use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{BenchmarkId, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::gass::{CandidateSchedule, GassConfig, StepSchedule};
use crate::sampling::ProjectionBox;
use crate::schedule::{inner_sample_size, RiskSchedule};
use crate::shape::ShapeConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    GassCvar,
    GassCvarArl,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::GassCvar => "gass_cvar",
            Algorithm::GassCvarArl => "gass_cvar_arl",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanInit {
    /// Each replication draws `μ_0 ~ U[mean_init_lo, mean_init_hi]^D`.
    Uniform,
    /// Every replication starts at `mean_init_fixed`.
    Fixed,
}

/// A complete experiment description, stored as a flat TOML document.
///
/// See `config/published_l0.toml` for an annotated example with units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkId,
    pub dimension: usize,
    pub algorithm: Algorithm,
    pub alpha_star: f64,
    pub alpha_init: f64,
    pub effective_size: usize,
    pub n_candidates: usize,
    #[serde(default)]
    pub n_candidates_growth: f64,
    pub s_o: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub step_a: f64,
    pub step_b: f64,
    pub step_gamma: f64,
    pub mean_init: MeanInit,
    #[serde(default = "default_mean_init_lo")]
    pub mean_init_lo: f64,
    #[serde(default = "default_mean_init_hi")]
    pub mean_init_hi: f64,
    #[serde(default)]
    pub mean_init_fixed: Vec<f64>,
    pub var_init: f64,
    pub box_mean_lo: f64,
    pub box_mean_hi: f64,
    pub box_var_lo: f64,
    pub box_var_hi: f64,
    pub max_iterations: usize,
    pub grad_norm_stop: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub final_eval_budget: usize,
    /// A run has reached the target once its best CVaR is within
    /// `(target_ratio - 1) · |reference|` of the reference optimum.
    #[serde(default = "default_target_ratio")]
    pub target_ratio: f64,
    #[serde(default = "default_reference_n_candidates")]
    pub reference_n_candidates: usize,
    #[serde(default = "default_reference_inner_samples")]
    pub reference_inner_samples: usize,
    #[serde(default = "default_reference_max_iterations")]
    pub reference_max_iterations: usize,
}

fn default_mean_init_lo() -> f64 {
    -30.0
}
fn default_mean_init_hi() -> f64 {
    30.0
}
fn default_target_ratio() -> f64 {
    1.1
}
fn default_reference_n_candidates() -> usize {
    5000
}
fn default_reference_inner_samples() -> usize {
    100_000
}
fn default_reference_max_iterations() -> usize {
    300
}

impl ExperimentConfig {
    /// The published experimental setup on `l_0` in ten dimensions.
    pub fn published_defaults() -> Self {
        ExperimentConfig {
            benchmark: BenchmarkId::L0,
            dimension: 10,
            algorithm: Algorithm::GassCvarArl,
            alpha_star: 0.99,
            alpha_init: 0.0,
            effective_size: 50,
            n_candidates: 1000,
            n_candidates_growth: 0.0,
            s_o: 1e5,
            rho: 0.1,
            epsilon: 1e-10,
            step_a: 50.0,
            step_b: 2000.0,
            step_gamma: 0.6,
            mean_init: MeanInit::Uniform,
            mean_init_lo: -30.0,
            mean_init_hi: 30.0,
            mean_init_fixed: Vec::new(),
            var_init: 1000.0,
            box_mean_lo: -100.0,
            box_mean_hi: 100.0,
            box_var_lo: 1e-6,
            box_var_hi: 1e4,
            max_iterations: 1000,
            grad_norm_stop: 1e-3,
            replications: 50,
            master_seed: 20_160_601,
            final_eval_budget: 100_000,
            target_ratio: 1.1,
            reference_n_candidates: 5000,
            reference_inner_samples: 100_000,
            reference_max_iterations: 300,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn benchmark_spec(&self) -> Result<BenchmarkSpec> {
        BenchmarkSpec::new(self.benchmark, self.dimension).map_err(|e| Error::config("dimension", e.to_string()))
    }

    pub fn projection_box(&self) -> Result<ProjectionBox> {
        ProjectionBox::uniform(
            self.dimension,
            (self.box_mean_lo, self.box_mean_hi),
            (self.box_var_lo, self.box_var_hi),
        )
        .map_err(|e| Error::config("box_*", e.to_string()))
    }

    pub fn step_schedule(&self) -> StepSchedule {
        StepSchedule {
            a: self.step_a,
            b: self.step_b,
            gamma: self.step_gamma,
        }
    }

    pub fn gass_config(&self) -> Result<GassConfig> {
        Ok(GassConfig {
            epsilon: self.epsilon,
            step: self.step_schedule(),
            candidates: CandidateSchedule {
                base: self.n_candidates,
                growth: self.n_candidates_growth,
            },
            shape: ShapeConfig::new(self.s_o, self.rho).map_err(|e| Error::config("s_o/rho", e.to_string()))?,
            projection: self.projection_box()?,
            max_iterations: self.max_iterations,
            grad_norm_stop: self.grad_norm_stop,
            final_eval_budget: self.final_eval_budget,
        })
    }

    pub fn risk_schedule(&self) -> Result<RiskSchedule> {
        RiskSchedule::new(self.alpha_init, self.alpha_star).map_err(|e| Error::config("alpha_init", e.to_string()))
    }

    /// Inner sample size of the fixed-level engine.
    pub fn fixed_inner_samples(&self) -> Result<usize> {
        inner_sample_size(self.alpha_star, self.effective_size).map_err(|e| Error::config("alpha_star", e.to_string()))
    }

    /// Checks every hard constraint and returns the warnings for conditions the
    /// convergence theory wants but practical runs usually violate.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(0.0..1.0).contains(&self.alpha_star) {
            return Err(Error::config("alpha_star", format!("{} is outside [0, 1)", self.alpha_star)));
        }
        if !(self.alpha_init >= 0.0 && self.alpha_init <= self.alpha_star) {
            return Err(Error::config(
                "alpha_init",
                format!("{} must lie in [0, alpha_star = {}]", self.alpha_init, self.alpha_star),
            ));
        }
        if self.effective_size < 2 {
            return Err(Error::config("effective_size", "must be at least 2 so CVaR tails are nonempty"));
        }
        self.benchmark_spec()?;
        self.step_schedule().validate()?;
        let gass = self.gass_config()?;
        gass.validate()?;
        if !(self.var_init > 0.0 && self.var_init.is_finite()) {
            return Err(Error::config("var_init", "must be finite and positive"));
        }
        if self.var_init < self.box_var_lo || self.var_init > self.box_var_hi {
            return Err(Error::config("var_init", "lies outside [box_var_lo, box_var_hi]"));
        }
        match self.mean_init {
            MeanInit::Uniform => {
                if !(self.mean_init_lo < self.mean_init_hi) {
                    return Err(Error::config("mean_init_lo", "must be below mean_init_hi"));
                }
                if self.mean_init_lo < self.box_mean_lo || self.mean_init_hi > self.box_mean_hi {
                    return Err(Error::config("mean_init_lo", "initial mean range leaves the projection box"));
                }
            }
            MeanInit::Fixed => {
                if self.mean_init_fixed.len() != self.dimension {
                    return Err(Error::config(
                        "mean_init_fixed",
                        format!("has length {} but dimension is {}", self.mean_init_fixed.len(), self.dimension),
                    ));
                }
                if self
                    .mean_init_fixed
                    .iter()
                    .any(|m| !(*m >= self.box_mean_lo && *m <= self.box_mean_hi))
                {
                    return Err(Error::config("mean_init_fixed", "lies outside the projection box"));
                }
            }
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        if !(self.target_ratio >= 1.0 && self.target_ratio.is_finite()) {
            return Err(Error::config("target_ratio", "must be finite and at least 1"));
        }
        if self.reference_n_candidates < 2 {
            return Err(Error::config("reference_n_candidates", "must be at least 2"));
        }
        if self.reference_inner_samples == 0 || self.reference_max_iterations == 0 {
            return Err(Error::config("reference_inner_samples", "reference budgets must be positive"));
        }

        let mut warnings = Vec::new();
        if self.n_candidates_growth == 0.0 {
            warnings.push(format!(
                "n_candidates is constant ({}); the convergence theory needs N_k to grow without bound",
                self.n_candidates
            ));
        }
        warnings.push(format!(
            "inner sample size is bounded by {} (effective_size / (1 - alpha_star)); the convergence theory needs M_k to grow without bound",
            self.fixed_inner_samples()?
        ));
        Ok(warnings)
    }
}

/// Reads, parses and validates a configuration file; theory warnings are logged.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    for warning in config.validate()? {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(config)
}
