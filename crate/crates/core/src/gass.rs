//! Gradient-based adaptive stochastic search over the Gaussian sampling family.
//!
//! Each iteration draws `N_k` candidates from the current distribution,
//! estimates the CVaR of each from `M_k` simulated losses, weights the
//! candidates with the logistic shape of `-Ĉ`, and takes a projected
//! Newton-like step on the natural parameter:
//!
//! ```text
//! θ_{k+1} = Π{ θ_k + β_k (V̂ar_θk[Γ] + εI)⁻¹ (Σ_i w_i Γ(x_i) - E_θk[Γ]) }
//! ```
//!
//! [`run_gass_cvar`] works at a fixed risk level; [`run_gass_cvar_arl`] starts
//! low and raises the level as the gradient norm decays, spending fewer inner
//! simulations per candidate early on.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::sampling::{sufficient_statistics, NaturalParams, ProjectionBox, SamplingParams};
use crate::schedule::{inner_sample_size, RiskSchedule};
use crate::shape::ShapeConfig;
use crate::stream::StreamSeed;

const ITERATION_STREAM: u64 = 0;
const FINAL_STREAM: u64 = 1;

/// `β_k = a / (k + b)^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl StepSchedule {
    pub fn beta(&self, k: usize) -> f64 {
        self.a / (k as f64 + self.b).powf(self.gamma)
    }

    /// `Σ β_k = ∞` and `Σ β_k² < ∞` hold exactly when `a, b > 0` and `γ ∈ (1/2, 1]`.
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::config("step_a", format!("{} must be positive", self.a)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::config("step_b", format!("{} must be positive", self.b)));
        }
        if !(self.gamma > 0.5 && self.gamma <= 1.0) {
            return Err(Error::config(
                "step_gamma",
                format!("{} must lie in (0.5, 1] so that the steps sum to infinity with square-summable terms", self.gamma),
            ));
        }
        Ok(())
    }
}

/// `N_k = ⌈base · (k + 1)^growth⌉`; `growth = 0` gives a constant sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSchedule {
    pub base: usize,
    pub growth: f64,
}

impl CandidateSchedule {
    pub fn constant(n: usize) -> Self {
        CandidateSchedule { base: n, growth: 0.0 }
    }

    pub fn size(&self, k: usize) -> usize {
        if self.growth == 0.0 {
            self.base
        } else {
            (self.base as f64 * ((k + 1) as f64).powf(self.growth)).ceil() as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GassConfig {
    /// Hessian-proxy regulariser `ε`.
    pub epsilon: f64,
    pub step: StepSchedule,
    pub candidates: CandidateSchedule,
    pub shape: ShapeConfig,
    pub projection: ProjectionBox,
    pub max_iterations: usize,
    /// Stop once `‖ĝ_k‖₂` is at or below this value.
    pub grad_norm_stop: f64,
    /// Fresh inner samples per candidate in the final re-evaluation.
    pub final_eval_budget: usize,
}

impl GassConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be finite and positive"));
        }
        self.step.validate()?;
        if self.candidates.base < 2 {
            return Err(Error::config(
                "n_candidates",
                "at least 2 candidates are needed for a sample variance",
            ));
        }
        if !(self.candidates.growth >= 0.0 && self.candidates.growth.is_finite()) {
            return Err(Error::config("n_candidates_growth", "must be finite and nonnegative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        if !(self.grad_norm_stop >= 0.0) {
            return Err(Error::config("grad_norm_stop", "must be nonnegative"));
        }
        if self.final_eval_budget == 0 {
            return Err(Error::config("final_eval_budget", "must be at least 1"));
        }
        Ok(())
    }
}

/// Telemetry for one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha_k: f64,
    pub grad_norm: f64,
    /// `min_i Ĉ_{α_k}(x_k^i)` as estimated in the run.
    pub best_cvar_estimate: f64,
    /// Loss draws consumed through this iteration, final re-evaluation excluded.
    pub cumulative_loss_evals: u64,
    pub n_candidates: usize,
    pub inner_samples: usize,
    /// Sampling distribution the candidates were drawn from.
    pub params_snapshot: SamplingParams,
    /// `argmin_i Ĉ_{α_k}(x_k^i)`.
    pub best_candidate: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradThreshold,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub records: Vec<IterationRecord>,
    pub final_best_candidate: Vec<f64>,
    /// Fresh estimate of `Ĉ_{α*}` at the returned candidate.
    pub final_best_cvar: f64,
    pub terminated_by: Termination,
    /// Loss draws spent by the final re-evaluation.
    pub final_eval_evals: u64,
}

impl RunResult {
    /// Loss draws spent during the iterations.
    pub fn search_evals(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_loss_evals)
    }

    pub fn total_evals(&self) -> u64 {
        self.search_evals() + self.final_eval_evals
    }
}

/// Self-normalised weights `s_i / Σ_j s_j`; uniform when the sum underflows.
pub fn normalized_weights(shape_values: &[f64]) -> Result<Vec<f64>> {
    if shape_values.is_empty() {
        return Err(Error::input("no shape values to normalise"));
    }
    if shape_values.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::input("shape values must be finite and nonnegative"));
    }
    let total: f64 = shape_values.iter().sum();
    let n = shape_values.len();
    if total > 0.0 {
        Ok(shape_values.iter().map(|s| s / total).collect())
    } else {
        log::warn!("all {n} shape values underflowed; falling back to uniform weights");
        Ok(vec![1.0 / n as f64; n])
    }
}

/// `Σ_i w_i Γ(x_i)`.
pub fn weighted_suffstat_mean(weights: &[f64], stats: &[Vec<f64>]) -> Result<Vec<f64>> {
    if weights.len() != stats.len() || stats.is_empty() {
        return Err(Error::input(format!(
            "{} weights for {} statistic vectors",
            weights.len(),
            stats.len()
        )));
    }
    let dim = stats[0].len();
    if stats.iter().any(|s| s.len() != dim) {
        return Err(Error::input("statistic vectors differ in length"));
    }
    let mut out = vec![0.0; dim];
    for (w, s) in weights.iter().zip(stats) {
        for (o, v) in out.iter_mut().zip(s) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// Unbiased sample covariance of the statistic vectors.
///
/// Computed in the centred two-pass form, which equals
/// `(1/(N-1)) Σ ΓΓᵀ - (1/(N²-N)) (ΣΓ)(ΣΓ)ᵀ` but does not cancel catastrophically.
pub fn sample_variance_matrix(stats: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = stats.len();
    if n < 2 {
        return Err(Error::input(format!("sample variance needs at least 2 vectors, got {n}")));
    }
    let dim = stats[0].len();
    if stats.iter().any(|s| s.len() != dim) {
        return Err(Error::input("statistic vectors differ in length"));
    }
    let mut centre = vec![0.0; dim];
    for s in stats {
        for (c, v) in centre.iter_mut().zip(s) {
            *c += v;
        }
    }
    centre.iter_mut().for_each(|c| *c /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut dev = vec![0.0; dim];
    for s in stats {
        for j in 0..dim {
            dev[j] = s[j] - centre[j];
        }
        for a in 0..dim {
            for b in a..dim {
                cov[(a, b)] += dev[a] * dev[b];
            }
        }
    }
    let scale = 1.0 / (n as f64 - 1.0);
    for a in 0..dim {
        for b in a..dim {
            let v = cov[(a, b)] * scale;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(cov)
}

/// `ĝ = Ê_q[Γ] - E_θ[Γ]`.
pub fn gradient_estimate(weighted_mean: &[f64], analytic_mean: &[f64]) -> Result<Vec<f64>> {
    if weighted_mean.len() != analytic_mean.len() {
        return Err(Error::input("gradient operands differ in length"));
    }
    Ok(weighted_mean.iter().zip(analytic_mean).map(|(a, b)| a - b).collect())
}

/// Solves `(V + εI) u = g` for symmetric positive semidefinite `V`.
fn regularized_solve(var_matrix: &DMatrix<f64>, grad: &[f64], epsilon: f64) -> Result<DVector<f64>> {
    let dim = grad.len();
    if var_matrix.nrows() != dim || var_matrix.ncols() != dim {
        return Err(Error::input(format!(
            "variance matrix is {}x{} but the gradient has length {dim}",
            var_matrix.nrows(),
            var_matrix.ncols()
        )));
    }
    let rhs = DVector::from_column_slice(grad);
    let system = var_matrix + DMatrix::<f64>::identity(dim, dim) * epsilon;
    if let Some(chol) = system.clone().cholesky() {
        return Ok(chol.solve(&rhs));
    }
    // Rounding pushed an eigenvalue below -ε: floor the spectrum at ε instead.
    let eig = system.symmetric_eigen();
    let inv: DVector<f64> = eig.eigenvalues.map(|l| 1.0 / l.max(epsilon));
    let proj = eig.eigenvectors.transpose() * rhs;
    Ok(&eig.eigenvectors * proj.component_mul(&inv))
}

/// `Π{ θ + β (V + εI)⁻¹ ĝ }`.
pub fn newton_update(
    nat: &NaturalParams,
    grad: &[f64],
    var_matrix: &DMatrix<f64>,
    beta: f64,
    epsilon: f64,
    projection: &ProjectionBox,
) -> Result<NaturalParams> {
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::input("gradient estimate is not finite"));
    }
    if !(beta > 0.0 && epsilon > 0.0) {
        return Err(Error::input("step size and regulariser must be positive"));
    }
    let theta = nat.to_vec();
    if theta.len() != grad.len() {
        return Err(Error::input(format!(
            "parameter length {} does not match gradient length {}",
            theta.len(),
            grad.len()
        )));
    }
    let direction = regularized_solve(var_matrix, grad, epsilon)?;
    let stepped: Vec<f64> = theta.iter().zip(direction.iter()).map(|(t, u)| t + beta * u).collect();
    projection.project(&NaturalParams::from_vec(&stepped)?)
}

/// Result of one sampling/estimation/update pass.
struct Step {
    record: IterationRecord,
    grad_norm: f64,
    next: Option<SamplingParams>,
}

struct Engine<'a> {
    config: &'a GassConfig,
    loss: &'a dyn LossModel,
    seed: StreamSeed,
}

impl<'a> Engine<'a> {
    fn new(config: &'a GassConfig, loss: &'a dyn LossModel, init: &SamplingParams, seed: StreamSeed) -> Result<Self> {
        config.validate()?;
        let d = loss.dimension();
        if init.dimension() != d || config.projection.dimension() != d {
            return Err(Error::input(format!(
                "loss dimension {d}, initial distribution dimension {} and box dimension {} disagree",
                init.dimension(),
                config.projection.dimension()
            )));
        }
        Ok(Engine { config, loss, seed })
    }

    fn step(&self, k: usize, params: &SamplingParams, alpha: f64, inner: usize, evals_before: u64) -> Result<Step> {
        if inner == 0 {
            return Err(Error::config("inner_budget", format!("iteration {k} requested zero inner samples")));
        }
        let n = self.config.candidates.size(k);
        let iter_seed = self.seed.descend(&[ITERATION_STREAM, k as u64]);

        let evaluated: Vec<(Vec<f64>, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = iter_seed.child(i as u64).rng();
                let x = params.draw(&mut rng);
                let cvar = self.loss.simulate(&x, inner, &mut rng)?.cvar(alpha)?;
                Ok((x, cvar))
            })
            .collect::<Result<_>>()?;

        let scores: Vec<f64> = evaluated.iter().map(|(_, c)| -c).collect();
        let shaped = self.config.shape.shape_all(&scores)?;
        let weights = normalized_weights(&shaped)?;
        let stats = evaluated
            .iter()
            .map(|(x, _)| sufficient_statistics(x))
            .collect::<Result<Vec<_>>>()?;
        let weighted = weighted_suffstat_mean(&weights, &stats)?;
        let grad = gradient_estimate(&weighted, &params.expected_sufficient_statistics())?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();

        let (best_idx, best_cvar) = evaluated
            .iter()
            .enumerate()
            .map(|(i, (_, c))| (i, *c))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least two candidates");

        let record = IterationRecord {
            k,
            alpha_k: alpha,
            grad_norm,
            best_cvar_estimate: best_cvar,
            cumulative_loss_evals: evals_before + (n as u64) * (inner as u64),
            n_candidates: n,
            inner_samples: inner,
            params_snapshot: params.clone(),
            best_candidate: evaluated[best_idx].0.clone(),
        };

        let next = if grad_norm <= self.config.grad_norm_stop {
            None
        } else {
            let var = sample_variance_matrix(&stats)?;
            let nat = newton_update(
                &params.to_natural(),
                &grad,
                &var,
                self.config.step.beta(k),
                self.config.epsilon,
                &self.config.projection,
            )?;
            Some(SamplingParams::from_natural(&nat)?)
        };
        Ok(Step { record, grad_norm, next })
    }
}

/// Re-estimates `Ĉ_α` at each candidate with `budget` fresh draws (candidate `j`
/// uses substream `j` of `seed`) and returns the argmin and its estimate.
pub fn evaluate_final(
    candidates: &[Vec<f64>],
    alpha: f64,
    budget: usize,
    loss: &dyn LossModel,
    seed: StreamSeed,
) -> Result<(Vec<f64>, f64)> {
    if candidates.is_empty() {
        return Err(Error::input("no candidates to evaluate"));
    }
    if budget == 0 {
        return Err(Error::input("final evaluation budget must be positive"));
    }
    let values: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(j, x)| {
            let mut rng = seed.child(j as u64).rng();
            loss.simulate(x, budget, &mut rng)?.cvar(alpha)
        })
        .collect::<Result<_>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, v)| (j, *v))
        .expect("nonempty");
    Ok((candidates[best].clone(), value))
}

/// Fixed-risk-level search at `alpha_star`, `inner_budget(k)` losses per candidate.
///
/// Returns the candidate with the smallest in-run estimate over all iterations,
/// re-evaluated with a fresh budget.
pub fn run_gass_cvar(
    config: &GassConfig,
    loss: &dyn LossModel,
    init: &SamplingParams,
    alpha_star: f64,
    inner_budget: &dyn Fn(usize) -> usize,
    seed: StreamSeed,
) -> Result<RunResult> {
    if !(0.0..1.0).contains(&alpha_star) {
        return Err(Error::input(format!("target risk level {alpha_star} is outside [0, 1)")));
    }
    let engine = Engine::new(config, loss, init, seed)?;
    let mut params = init.clone();
    let mut records = Vec::new();
    let mut evals = 0u64;
    let mut incumbent: Option<(usize, f64)> = None;
    let mut terminated_by = Termination::MaxIterations;

    for k in 0..config.max_iterations {
        let step = engine.step(k, &params, alpha_star, inner_budget(k), evals)?;
        evals = step.record.cumulative_loss_evals;
        if incumbent.is_none_or(|(_, c)| step.record.best_cvar_estimate < c) {
            incumbent = Some((k, step.record.best_cvar_estimate));
        }
        records.push(step.record);
        match step.next {
            Some(next) => params = next,
            None => {
                terminated_by = Termination::GradThreshold;
                break;
            }
        }
    }

    let (best_k, _) = incumbent.expect("at least one iteration");
    let candidates = [records[best_k].best_candidate.clone()];
    finish(config, loss, alpha_star, seed, records, &candidates, terminated_by)
}

/// Adaptive-risk-level search: iteration `k` estimates CVaR at `α_k` with
/// `inner_sample_size(α_k, effective_size)` losses per candidate, and `α_k` is
/// advanced by the gradient-ratio rule after each update.
///
/// The per-iteration best candidates are re-evaluated at `alpha_star` at the end
/// and the best of them is returned.
pub fn run_gass_cvar_arl(
    config: &GassConfig,
    loss: &dyn LossModel,
    init: &SamplingParams,
    alpha_star: f64,
    schedule: RiskSchedule,
    effective_size: usize,
    seed: StreamSeed,
) -> Result<RunResult> {
    if schedule.target() != alpha_star {
        return Err(Error::input(format!(
            "risk schedule targets {} but the run targets {alpha_star}",
            schedule.target()
        )));
    }
    if effective_size < 2 {
        return Err(Error::config("effective_size", "must be at least 2 so CVaR tails are nonempty"));
    }
    let engine = Engine::new(config, loss, init, seed)?;
    let mut params = init.clone();
    let mut schedule = schedule;
    let mut records = Vec::new();
    let mut evals = 0u64;
    let mut terminated_by = Termination::MaxIterations;

    for k in 0..config.max_iterations {
        let inner = inner_sample_size(schedule.alpha(), effective_size)?;
        let step = engine.step(k, &params, schedule.alpha(), inner, evals)?;
        evals = step.record.cumulative_loss_evals;
        records.push(step.record);
        match step.next {
            Some(next) => {
                params = next;
                schedule = schedule.update(step.grad_norm)?;
            }
            None => {
                terminated_by = Termination::GradThreshold;
                break;
            }
        }
    }

    let candidates: Vec<Vec<f64>> = records.iter().map(|r| r.best_candidate.clone()).collect();
    finish(config, loss, alpha_star, seed, records, &candidates, terminated_by)
}

fn finish(
    config: &GassConfig,
    loss: &dyn LossModel,
    alpha_star: f64,
    seed: StreamSeed,
    records: Vec<IterationRecord>,
    candidates: &[Vec<f64>],
    terminated_by: Termination,
) -> Result<RunResult> {
    let budget = config.final_eval_budget;
    let (final_best_candidate, final_best_cvar) =
        evaluate_final(candidates, alpha_star, budget, loss, seed.child(FINAL_STREAM))?;
    Ok(RunResult {
        records,
        final_best_candidate,
        final_best_cvar,
        terminated_by,
        final_eval_evals: candidates.len() as u64 * budget as u64,
    })
}
