use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gass::{run_gass_cvar, run_gass_cvar_arl, RunResult, Termination};
use crate::loss::LossModel;
use crate::sampling::SamplingParams;
use crate::stream::StreamSeed;

use super::config::{Algorithm, ExperimentConfig, MeanInit};
use super::reference::reference_optimum;

/// Points on the evaluation-budget axis of the aggregate curve.
pub const CURVE_POINTS: usize = 200;

const INIT_STREAM: u64 = 0;
const RUN_STREAM: u64 = 1;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `0` uses the global rayon pool.
    pub workers: usize,
    /// Where large-budget reference optima are cached.
    pub reference_cache: Option<PathBuf>,
}

/// One replication's engine output plus the quality trajectory measured against
/// the exact pointwise CVaR at `α*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationDigest {
    pub replication: usize,
    pub initial_mean: Vec<f64>,
    pub result: RunResult,
    /// `min_{j ≤ k} C_{α*}(x_j*)` for each iteration `k`.
    pub best_so_far: Vec<f64>,
    /// `C_{α*}` at the sampling-distribution mean of each iteration.
    pub cvar_at_mean: Vec<f64>,
    /// Search evaluations spent when `best_so_far` first came within tolerance
    /// of the reference optimum.
    pub evals_to_target: Option<u64>,
}

impl ReplicationDigest {
    pub fn final_alpha(&self) -> f64 {
        self.result.records.last().map_or(0.0, |r| r.alpha_k)
    }

    pub fn hit_grad_threshold(&self) -> bool {
        self.result.terminated_by == Termination::GradThreshold
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub evals: u64,
    pub mean_ratio: f64,
    pub q10_ratio: f64,
    pub median_ratio: f64,
    pub q90_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub config: ExperimentConfig,
    pub reference_value: f64,
    pub replications: Vec<ReplicationDigest>,
    /// Best-CVaR ratio against cumulative loss evaluations, over all replications.
    pub curve: Vec<CurvePoint>,
    /// Mean `α_k` by iteration; shorter runs hold their last level.
    pub mean_alpha: Vec<f64>,
}

/// True when `value` is within `(ratio - 1) · |reference|` above `reference`.
pub fn within_target(value: f64, reference: f64, ratio: f64) -> bool {
    value - reference <= (ratio - 1.0) * reference.abs()
}

fn exact_cvar(loss: &dyn LossModel, x: &[f64], alpha: f64) -> Result<f64> {
    loss.cvar_oracle(x, alpha)
        .ok_or_else(|| Error::input("loss model has no pointwise CVaR oracle"))
}

/// Draws `μ_0` for a replication.
pub fn initial_params(config: &ExperimentConfig, replication: usize) -> Result<SamplingParams> {
    let mean = match config.mean_init {
        MeanInit::Fixed => config.mean_init_fixed.clone(),
        MeanInit::Uniform => {
            let seed = StreamSeed::from_u64(config.master_seed).descend(&[replication as u64, INIT_STREAM]);
            let mut rng = seed.rng();
            (0..config.dimension)
                .map(|_| rng.random_range(config.mean_init_lo..config.mean_init_hi))
                .collect()
        }
    };
    SamplingParams::isotropic(mean, config.var_init)
}

/// Runs a single replication of `config`.
pub fn run_replication(config: &ExperimentConfig, replication: usize, reference: f64) -> Result<ReplicationDigest> {
    let annotate = |e: Error| Error::Replication {
        replication,
        source: Box::new(e),
    };
    let loss = config.benchmark_spec()?;
    let gass = config.gass_config()?;
    let init = initial_params(config, replication).map_err(annotate)?;
    let seed = StreamSeed::from_u64(config.master_seed).descend(&[replication as u64, RUN_STREAM]);
    let result = match config.algorithm {
        Algorithm::GassCvar => {
            let m = config.fixed_inner_samples()?;
            run_gass_cvar(&gass, &loss, &init, config.alpha_star, &|_| m, seed)
        }
        Algorithm::GassCvarArl => run_gass_cvar_arl(
            &gass,
            &loss,
            &init,
            config.alpha_star,
            config.risk_schedule()?,
            config.effective_size,
            seed,
        ),
    }
    .map_err(annotate)?;

    let mut best_so_far = Vec::with_capacity(result.records.len());
    let mut cvar_at_mean = Vec::with_capacity(result.records.len());
    let mut best = f64::INFINITY;
    let mut evals_to_target = None;
    for r in &result.records {
        best = best.min(exact_cvar(&loss, &r.best_candidate, config.alpha_star).map_err(annotate)?);
        best_so_far.push(best);
        cvar_at_mean.push(exact_cvar(&loss, r.params_snapshot.mean(), config.alpha_star).map_err(annotate)?);
        if evals_to_target.is_none() && within_target(best, reference, config.target_ratio) {
            evals_to_target = Some(r.cumulative_loss_evals);
        }
    }
    Ok(ReplicationDigest {
        replication,
        initial_mean: init.mean().to_vec(),
        result,
        best_so_far,
        cvar_at_mean,
        evals_to_target,
    })
}

/// Executes every replication of `config` and aggregates the results.
///
/// The output depends only on the configuration: each replication derives its
/// streams from `(master_seed, replication)`, so neither worker count nor
/// scheduling changes any number.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ReplicationSummary> {
    config.validate()?;
    let reference = reference_optimum(config, options)?;
    let run_all = || -> Result<Vec<ReplicationDigest>> {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, r, reference))
            .collect()
    };
    let replications = if options.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?
            .install(run_all)?
    } else {
        run_all()?
    };
    Ok(summarize(config.clone(), reference, replications))
}

pub fn summarize(config: ExperimentConfig, reference: f64, replications: Vec<ReplicationDigest>) -> ReplicationSummary {
    let curve = ratio_curve(&replications, reference);
    let mean_alpha = mean_alpha_trajectory(&replications);
    ReplicationSummary {
        config,
        reference_value: reference,
        replications,
        curve,
        mean_alpha,
    }
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Value of a replication's best-so-far step function at a given budget.
fn best_at(digest: &ReplicationDigest, evals: u64) -> Option<f64> {
    let pos = digest
        .result
        .records
        .partition_point(|r| r.cumulative_loss_evals <= evals);
    pos.checked_sub(1).map(|i| digest.best_so_far[i])
}

fn ratio_curve(replications: &[ReplicationDigest], reference: f64) -> Vec<CurvePoint> {
    let first = replications
        .iter()
        .filter_map(|d| d.result.records.first().map(|r| r.cumulative_loss_evals))
        .max();
    let last = replications.iter().map(|d| d.result.search_evals()).max();
    let (Some(first), Some(last)) = (first, last) else {
        return Vec::new();
    };
    let span = last.saturating_sub(first);
    let steps = if span == 0 { 0 } else { CURVE_POINTS - 1 };
    (0..=steps)
        .map(|i| {
            let evals = if steps == 0 { first } else { first + span * i as u64 / steps as u64 };
            let mut ratios: Vec<f64> = replications
                .iter()
                .filter_map(|d| best_at(d, evals))
                .map(|v| v / reference)
                .collect();
            ratios.sort_by(f64::total_cmp);
            CurvePoint {
                evals,
                mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
                q10_ratio: quantile(&ratios, 0.1),
                median_ratio: quantile(&ratios, 0.5),
                q90_ratio: quantile(&ratios, 0.9),
            }
        })
        .collect()
}

fn mean_alpha_trajectory(replications: &[ReplicationDigest]) -> Vec<f64> {
    let longest = replications.iter().map(|d| d.result.records.len()).max().unwrap_or(0);
    (0..longest)
        .map(|k| {
            let total: f64 = replications
                .iter()
                .map(|d| {
                    let recs = &d.result.records;
                    recs.get(k).or(recs.last()).map_or(0.0, |r| r.alpha_k)
                })
                .sum();
            total / replications.len() as f64
        })
        .collect()
}
