//! Reference optima for the CVaR-ratio curves.
//!
//! `l_0` has an analytic optimum. For the other benchmarks the optimum comes
//! from a large-budget fixed-level run, cached on disk under a hash of every
//! setting that influences it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{l0_min_cvar_oracle, BenchmarkId};
use crate::error::{Error, Result};
use crate::gass::{run_gass_cvar, CandidateSchedule};
use crate::loss::LossModel;
use crate::stream::StreamSeed;

use super::config::{ExperimentConfig, MeanInit};
use super::experiment::{initial_params, RunOptions};

/// Replication index reserved for the reference run's streams.
const REFERENCE_REPLICATION: usize = u32::MAX as usize;

/// Every setting the reference run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ReferenceKey {
    benchmark: BenchmarkId,
    dimension: usize,
    alpha_star: f64,
    n_candidates: usize,
    inner_samples: usize,
    max_iterations: usize,
    s_o: f64,
    rho: f64,
    epsilon: f64,
    step_a: f64,
    step_b: f64,
    step_gamma: f64,
    mean_init: MeanInit,
    mean_init_lo: f64,
    mean_init_hi: f64,
    mean_init_fixed: Vec<f64>,
    var_init: f64,
    box_mean_lo: f64,
    box_mean_hi: f64,
    box_var_lo: f64,
    box_var_hi: f64,
    grad_norm_stop: f64,
    final_eval_budget: usize,
    master_seed: u64,
}

impl ReferenceKey {
    fn of(c: &ExperimentConfig) -> Self {
        ReferenceKey {
            benchmark: c.benchmark,
            dimension: c.dimension,
            alpha_star: c.alpha_star,
            n_candidates: c.reference_n_candidates,
            inner_samples: c.reference_inner_samples,
            max_iterations: c.reference_max_iterations,
            s_o: c.s_o,
            rho: c.rho,
            epsilon: c.epsilon,
            step_a: c.step_a,
            step_b: c.step_b,
            step_gamma: c.step_gamma,
            mean_init: c.mean_init,
            mean_init_lo: c.mean_init_lo,
            mean_init_hi: c.mean_init_hi,
            mean_init_fixed: c.mean_init_fixed.clone(),
            var_init: c.var_init,
            box_mean_lo: c.box_mean_lo,
            box_mean_hi: c.box_mean_hi,
            box_var_lo: c.box_var_lo,
            box_var_hi: c.box_var_hi,
            grad_norm_stop: c.grad_norm_stop,
            final_eval_budget: c.final_eval_budget,
            master_seed: c.master_seed,
        }
    }

    fn hash(&self) -> String {
        let text = toml::to_string(self).expect("flat key serialises");
        hex::encode(&Sha256::digest(text.as_bytes())[..12])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub hash: String,
    pub value: f64,
    pub candidate: Vec<f64>,
}

pub fn cache_path(dir: &Path, config: &ExperimentConfig) -> PathBuf {
    dir.join(format!("reference-{}.toml", ReferenceKey::of(config).hash()))
}

/// Large-budget fixed-level run; the optimum is the smallest exact CVaR among
/// the per-iteration best candidates.
pub fn compute_reference_run(config: &ExperimentConfig) -> Result<ReferenceRecord> {
    let loss = config.benchmark_spec()?;
    let mut gass = config.gass_config()?;
    gass.candidates = CandidateSchedule::constant(config.reference_n_candidates);
    gass.max_iterations = config.reference_max_iterations;
    let init = initial_params(config, REFERENCE_REPLICATION)?;
    let seed = StreamSeed::from_u64(config.master_seed).descend(&[REFERENCE_REPLICATION as u64, 1]);
    let m = config.reference_inner_samples;
    let result = run_gass_cvar(&gass, &loss, &init, config.alpha_star, &|_| m, seed)?;

    let mut best: Option<(f64, Vec<f64>)> = None;
    for x in result
        .records
        .iter()
        .map(|r| &r.best_candidate)
        .chain(std::iter::once(&result.final_best_candidate))
    {
        let v = loss.cvar_oracle(x, config.alpha_star).unwrap_or(result.final_best_cvar);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x.clone()));
        }
    }
    let (value, candidate) = best.expect("reference run has records");
    Ok(ReferenceRecord {
        hash: ReferenceKey::of(config).hash(),
        value,
        candidate,
    })
}

/// The optimum used as the denominator of every CVaR ratio for `config`.
pub fn reference_optimum(config: &ExperimentConfig, options: &RunOptions) -> Result<f64> {
    if config.benchmark == BenchmarkId::L0 {
        return Ok(l0_min_cvar_oracle(config.dimension, config.alpha_star)?.1);
    }
    if let Some(dir) = &options.reference_cache {
        let path = cache_path(dir, config);
        if let Ok(text) = std::fs::read_to_string(&path) {
            let record: ReferenceRecord = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            return Ok(record.value);
        }
        let record = compute_reference_run(config)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let text = toml::to_string(&record).expect("record serialises");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        log::info!("cached reference optimum {} at {}", record.value, path.display());
        return Ok(record.value);
    }
    Ok(compute_reference_run(config)?.value)
}

/// Builds (or reads from cache) the reference optimum for `config`.
pub fn emit_reference_run(config: &ExperimentConfig, options: &RunOptions) -> Result<f64> {
    config.validate()?;
    reference_optimum(config, options)
}
