//! Plot-ready CSV output.
//!
//! All files use comma separators, `.` decimals and LF line endings, and floats
//! are written in shortest round-trip form so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::experiment::ReplicationSummary;

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const ALPHA_FILE: &str = "alpha.csv";
pub const REPLICATIONS_FILE: &str = "replications.csv";

/// `rep,k,alpha,grad_norm,best_cvar,cum_evals,mean_0,...,mean_{D-1}`, one row
/// per iteration of every replication. `best_cvar` is that iteration's in-run
/// estimate at its own risk level.
pub fn iterations_csv(summary: &ReplicationSummary) -> String {
    let d = summary.config.dimension;
    let mut out = String::from("rep,k,alpha,grad_norm,best_cvar,cum_evals");
    for i in 0..d {
        write!(out, ",mean_{i}").unwrap();
    }
    out.push('\n');
    for digest in &summary.replications {
        for r in &digest.result.records {
            write!(
                out,
                "{},{},{},{},{},{}",
                digest.replication, r.k, r.alpha_k, r.grad_norm, r.best_cvar_estimate, r.cumulative_loss_evals
            )
            .unwrap();
            for m in r.params_snapshot.mean() {
                write!(out, ",{m}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Aggregate best-CVaR ratio against cumulative loss evaluations.
pub fn curve_csv(summary: &ReplicationSummary) -> String {
    let mut out = String::from("evals,mean_ratio,q10_ratio,median_ratio,q90_ratio\n");
    for p in &summary.curve {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.evals, p.mean_ratio, p.q10_ratio, p.median_ratio, p.q90_ratio
        )
        .unwrap();
    }
    out
}

pub fn alpha_csv(summary: &ReplicationSummary) -> String {
    let mut out = String::from("k,mean_alpha\n");
    for (k, a) in summary.mean_alpha.iter().enumerate() {
        writeln!(out, "{k},{a}").unwrap();
    }
    out
}

/// One row per replication with its final outcome and budget.
pub fn replications_csv(summary: &ReplicationSummary) -> String {
    let mut out = String::from(
        "rep,iterations,terminated_by,final_alpha,final_best_cvar,final_exact_ratio,search_evals,final_eval_evals,evals_to_target\n",
    );
    for d in &summary.replications {
        let exact_final = d.best_so_far.last().copied().unwrap_or(f64::NAN);
        let terminated = match d.result.terminated_by {
            crate::gass::Termination::GradThreshold => "grad_threshold",
            crate::gass::Termination::MaxIterations => "max_iterations",
        };
        let target = d.evals_to_target.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            d.replication,
            d.result.records.len(),
            terminated,
            d.final_alpha(),
            d.result.final_best_cvar,
            exact_final / summary.reference_value,
            d.result.search_evals(),
            d.result.final_eval_evals,
            target
        )
        .unwrap();
    }
    out
}

/// Writes the four CSV files into `dir`, creating it if needed.
pub fn emit_csv(summary: &ReplicationSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (ITERATIONS_FILE, iterations_csv(summary)),
        (CURVE_FILE, curve_csv(summary)),
        (ALPHA_FILE, alpha_csv(summary)),
        (REPLICATIONS_FILE, replications_csv(summary)),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
