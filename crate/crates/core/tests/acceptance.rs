//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::path::Path;

use gass_cvar::benchmarks::{l0_cvar_oracle, l0_min_cvar_oracle, BenchmarkId, BenchmarkSpec};
use gass_cvar::gass::{gradient_estimate, normalized_weights, sample_variance_matrix, weighted_suffstat_mean};
use gass_cvar::harness::{
    emit_csv, load_config, run_experiment, Algorithm, ExperimentConfig, ReplicationSummary, RunOptions,
    ALPHA_FILE, CURVE_FILE, ITERATIONS_FILE, REPLICATIONS_FILE,
};
use gass_cvar::risk::{empirical_cvar, empirical_var, gaussian_cvar_oracle, standard_normal_cvar, LossSampleSet};
use gass_cvar::schedule::{inner_sample_size, RiskSchedule};
use gass_cvar::shape::sample_quantile_threshold;
use gass_cvar::{LossModel, StreamSeed};
use rand_distr::{Distribution, StandardNormal};

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("criterion {id}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn normal_sample(seed: u64, n: usize) -> LossSampleSet {
    let mut rng = StreamSeed::from_u64(seed).rng();
    LossSampleSet::new((0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap()
}

fn estimator_correctness() -> (bool, String) {
    let levels = [(0.9, 0.03), (0.95, 0.05), (0.99, 0.15)];
    let mut hits = [0usize; 3];
    let mut mean_exact = true;
    let mut ordered = true;
    for seed in 0..100 {
        let s = normal_sample(seed, 100_000);
        for (i, &(alpha, tol)) in levels.iter().enumerate() {
            let c = empirical_cvar(&s, alpha).unwrap();
            if (c - gaussian_cvar_oracle(0.0, 1.0, alpha).unwrap()).abs() <= tol {
                hits[i] += 1;
            }
        }
        let mean = s.losses().iter().sum::<f64>() / s.len() as f64;
        mean_exact &= empirical_cvar(&s, 0.0).unwrap() == mean;
        for a in [0.0, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999] {
            ordered &= empirical_cvar(&s, a).unwrap() >= empirical_var(&s, a).unwrap();
        }
    }
    let ok = hits.iter().all(|&h| h >= 95) && mean_exact && ordered;
    (
        ok,
        format!(
            "within tolerance in {}/{}/{} of 100 seeds at α=0.9/0.95/0.99 (need ≥ 95); α=0 equals mean: {mean_exact}; CVaR ≥ VaR: {ordered}",
            hits[0], hits[1], hits[2]
        ),
    )
}

fn formula_fixtures() -> (bool, String) {
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };
    let ten = LossSampleSet::new((1..=10).map(f64::from).collect()).unwrap();
    check("VaR_0.8(1..10) = 8", empirical_var(&ten, 0.8).unwrap() == 8.0);
    check("CVaR_0.8(1..10) = 9.5", empirical_cvar(&ten, 0.8).unwrap() == 9.5);
    check("CVaR_0(1..10) = 5.5", empirical_cvar(&ten, 0.0).unwrap() == 5.5);
    check(
        "(1-ρ) quantile of 1..10 = 9",
        sample_quantile_threshold(ten.losses(), 0.1).unwrap() == 9.0,
    );
    check("weights (1,3)", normalized_weights(&[1.0, 3.0]).unwrap() == vec![0.25, 0.75]);
    check("uniform fallback", normalized_weights(&[0.0; 4]).unwrap() == vec![0.25; 4]);
    let stats = vec![vec![0.0, 0.0], vec![4.0, 8.0]];
    check(
        "weighted mean",
        weighted_suffstat_mean(&[0.25, 0.75], &stats).unwrap() == vec![3.0, 6.0],
    );
    check(
        "gradient",
        gradient_estimate(&[3.0, 6.0], &[1.0, 2.0]).unwrap() == vec![2.0, 4.0],
    );
    // small-N variance matrix against ΣΓΓᵀ/(N-1) - (ΣΓ)(ΣΓ)ᵀ/(N²-N), exact in binary
    let g = vec![vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 4.0]];
    let v = sample_variance_matrix(&g).unwrap();
    let want = [[1.75, -3.25], [-3.25, 6.333333333333333]];
    check(
        "variance matrix N=3",
        (0..2).all(|a| (0..2).all(|b| (v[(a, b)] - want[a][b]).abs() < 1e-14)),
    );
    let stepped = RiskSchedule::new(0.5, 0.99).unwrap().update(1.0).unwrap().update(0.5).unwrap();
    check("risk update 0.745", (stepped.alpha() - 0.745).abs() < 1e-15);
    check("M(0.99, 50) = 5000", inner_sample_size(0.99, 50).unwrap() == 5000);
    check("M(0.95, 30) = 600", inner_sample_size(0.95, 30).unwrap() == 600);
    let factors = [
        (0.5, 0.7978845608028654),
        (0.9, 1.754983319324868),
        (0.95, 2.062712807507426),
        (0.99, 2.665214220345805),
    ];
    check(
        "Gaussian CVaR factors",
        factors
            .iter()
            .all(|&(a, f)| (standard_normal_cvar(a).unwrap() - f).abs() < 1e-12),
    );
    let point = |id, x: &[f64]| BenchmarkSpec::new(id, x.len()).unwrap().deterministic_loss(x).unwrap();
    check("Rastrigin(0, D=10) = -201", point(BenchmarkId::Rastrigin, &[0.0; 10]) == -201.0);
    check("Rosenbrock(-1.2, 1) = 24.2", (point(BenchmarkId::Rosenbrock, &[-1.2, 1.0]) - 24.2).abs() < 1e-12);
    check("Powell(1,2,3,4) = 1512", point(BenchmarkId::Powell, &[1.0, 2.0, 3.0, 4.0]) == 1512.0);
    check(
        "Pintér(1,2,3)",
        (point(BenchmarkId::Pinter, &[1.0, 2.0, 3.0]) - 136.1625421439159).abs() < 1e-10,
    );
    check(
        "Levy(0,0,0)",
        (point(BenchmarkId::Levy, &[0.0; 3]) - -1.369189108233949).abs() < 1e-12,
    );
    check(
        "l0 CVaR at ones, D=10, α=0.99",
        (l0_cvar_oracle(&[1.0; 10], 0.99).unwrap() - 12.665214220345805).abs() < 1e-12,
    );
    check(
        "l0 minimum D=2, α=0.95",
        (l0_min_cvar_oracle(2, 0.95).unwrap().1 - 4.04341858247029).abs() < 1e-9,
    );
    check(
        "l0 minimum D=10, α=0.99",
        (l0_min_cvar_oracle(10, 0.99).unwrap().1 - 12.5896779737746).abs() < 1e-9,
    );
    let detail = if failed.is_empty() {
        "all fixtures match".to_string()
    } else {
        format!("mismatched: {}", failed.join(", "))
    };
    (failed.is_empty(), detail)
}

fn schedule_convergence() -> (bool, String) {
    let target = 0.99;
    let mut s = RiskSchedule::new(0.0, target).unwrap();
    let mut reached = None;
    let mut monotone = true;
    let mut identity = true;
    let mut prev_norm: Option<f64> = None;
    for k in 0..=20 {
        let g = 2f64.powi(-k);
        let next = s.update(g).unwrap();
        monotone &= next.alpha() >= s.alpha();
        if let Some(p) = prev_norm {
            if next.alpha() > s.alpha() {
                let lhs = (target - next.alpha()) / (target - s.alpha());
                identity &= (lhs - g / p).abs() <= 1e-9;
            }
        }
        prev_norm = Some(g);
        s = next;
        if reached.is_none() && target - s.alpha() <= 1e-4 {
            reached = Some(k);
        }
    }
    let ok = reached.is_some_and(|k| k <= 20) && monotone && identity;
    (
        ok,
        format!(
            "within 1e-4 of α* after update {:?} (need ≤ 20); monotone: {monotone}; ratio identity: {identity}",
            reached
        ),
    )
}

fn desk_config(algorithm: Algorithm) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/desk_l0.toml");
    let mut c = load_config(&path).unwrap();
    c.algorithm = algorithm;
    c
}

fn final_exact(summary: &ReplicationSummary) -> Vec<f64> {
    let spec = summary.config.benchmark_spec().unwrap();
    summary
        .replications
        .iter()
        .map(|d| spec.cvar_oracle(&d.result.final_best_candidate, summary.config.alpha_star).unwrap())
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn optimization_quality(fixed: &ReplicationSummary, adaptive: &ReplicationSummary) -> (bool, String) {
    let reference = fixed.reference_value;
    let tol = 1.1 * reference;
    let count = |s: &ReplicationSummary| final_exact(s).iter().filter(|&&v| v <= tol).count();
    let (a, b) = (count(fixed), count(adaptive));
    let worst = |s: &ReplicationSummary| final_exact(s).into_iter().fold(f64::NEG_INFINITY, f64::max);
    (
        a >= 8 && b >= 8,
        format!(
            "final C_α* within 10% of {reference:.6}: GASS-CVaR {a}/10, GASS-CVaR-ARL {b}/10 (need ≥ 8); worst ratios {:.4} / {:.4}",
            worst(fixed) / reference,
            worst(adaptive) / reference
        ),
    )
}

fn budget_saving(fixed: &ReplicationSummary, adaptive: &ReplicationSummary) -> (bool, String) {
    let ratios: Vec<f64> = fixed
        .replications
        .iter()
        .zip(&adaptive.replications)
        .map(|(f, a)| match (f.evals_to_target, a.evals_to_target) {
            (Some(f), Some(a)) => f as f64 / a as f64,
            (None, Some(_)) => f64::INFINITY,
            (Some(_), None) => 0.0,
            (None, None) => f64::NAN,
        })
        .collect();
    let m = median(ratios.iter().copied().filter(|r| !r.is_nan()).collect());
    let evals = |s: &ReplicationSummary| {
        median(s.replications.iter().filter_map(|d| d.evals_to_target).map(|e| e as f64).collect())
    };
    (
        m >= 1.5,
        format!(
            "median paired evaluations-to-target ratio GASS-CVaR / GASS-CVaR-ARL = {m:.3} (need ≥ 1.5); medians {:.0} vs {:.0}",
            evals(fixed),
            evals(adaptive)
        ),
    )
}

fn trajectory_shape(adaptive: &ReplicationSummary) -> (bool, String) {
    let target = adaptive.config.alpha_star;
    let converged: Vec<_> = adaptive.replications.iter().filter(|d| d.hit_grad_threshold()).collect();
    let good = converged
        .iter()
        .filter(|d| {
            let alphas: Vec<f64> = d.result.records.iter().map(|r| r.alpha_k).collect();
            d.final_alpha() >= target - 0.05 && alphas.windows(2).all(|w| w[1] >= w[0])
        })
        .count();
    let mean_nondecreasing = adaptive.mean_alpha.windows(2).all(|w| w[1] >= w[0]);
    let final_mean = adaptive.mean_alpha.last().copied().unwrap_or(0.0);
    (
        !converged.is_empty() && good == converged.len() && mean_nondecreasing,
        format!(
            "{} of 10 runs hit the gradient stop; {good} of them end at α ≥ α* − 0.05 with nondecreasing α_k; mean α curve nondecreasing: {mean_nondecreasing}, final {final_mean:.4}",
            converged.len()
        ),
    )
}

fn worker_invariance() -> (bool, String) {
    let config = desk_config(Algorithm::GassCvarArl);
    let one = tempfile::tempdir().unwrap();
    let eight = tempfile::tempdir().unwrap();
    for (workers, dir) in [(1, &one), (8, &eight)] {
        let options = RunOptions {
            workers,
            reference_cache: None,
        };
        emit_csv(&run_experiment(&config, &options).unwrap(), dir.path()).unwrap();
    }
    let files = [ITERATIONS_FILE, CURVE_FILE, ALPHA_FILE, REPLICATIONS_FILE];
    let same: Vec<bool> = files
        .iter()
        .map(|f| std::fs::read(one.path().join(f)).unwrap() == std::fs::read(eight.path().join(f)).unwrap())
        .collect();
    (
        same.iter().all(|&s| s),
        format!("byte-identical CSVs at 1 and 8 workers: {}", same.iter().all(|&s| s)),
    )
}

fn main() {
    let mut gate = Gate { failures: 0 };

    let (ok, d) = estimator_correctness();
    gate.report("1 (estimator correctness)", ok, d);
    let (ok, d) = formula_fixtures();
    gate.report("2 (formula fixtures)", ok, d);
    let (ok, d) = schedule_convergence();
    gate.report("3 (risk-schedule convergence)", ok, d);

    let fixed = run_experiment(&desk_config(Algorithm::GassCvar), &RunOptions::default()).unwrap();
    let adaptive = run_experiment(&desk_config(Algorithm::GassCvarArl), &RunOptions::default()).unwrap();
    let (ok, d) = optimization_quality(&fixed, &adaptive);
    gate.report("4 (desk-scale optimisation quality)", ok, d);
    let (ok, d) = budget_saving(&fixed, &adaptive);
    gate.report("5 (budget saving)", ok, d);
    let (ok, d) = trajectory_shape(&adaptive);
    gate.report("6 (adaptive risk-level trajectory)", ok, d);
    let (ok, d) = worker_invariance();
    gate.report("7 (determinism across worker counts)", ok, d);

    println!(
        "criterion 8 (published L1–L5 ratio curves): NOT REPRODUCIBLE — no tabulated values exist; covered by criteria 4–6 and self-generated reference runs"
    );

    if gate.failures > 0 {
        println!("acceptance: {} criterion(s) failed", gate.failures);
        std::process::exit(1);
    }
    println!("acceptance: all checkable criteria passed");
}
