//! On-disk run artifacts: per-run JSON records and convergence curves, the
//! per-run summary table and per-configuration statistics. Every file is
//! written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::suite::{ConfigStats, RunRow};

pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn curve_csv(row: &RunRow) -> String {
    let mut out = String::from("evaluation,best_cost\n");
    for p in &row.record.curve {
        let _ = writeln!(out, "{},{}", p.evaluation, p.best_cost);
    }
    out
}

/// `summary.csv`: one row per run. The leading `;` timestamp line is the
/// only part that differs between identical reruns (runtime_s is wall time
/// and excluded from the reproducibility contract).
pub fn summary_csv(rows: &[RunRow]) -> String {
    let mut out = format!("; generated unix:{}\n", unix_now());
    out.push_str("config_id,seed,best_cost,feasible,evals_to_best,runtime_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            r.config_id,
            r.seed,
            r.record.reported_cost(),
            r.record.feasible(),
            r.record.evaluations_to_best,
            r.runtime_s
        );
    }
    out
}

pub fn stats_csv(stats: &[ConfigStats]) -> String {
    let mut out =
        String::from("config_id,runs,best_cost,mean_cost,success_rate,mean_evals_to_best\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.config_id, s.runs, s.best_cost, s.mean_cost, s.success_rate, s.mean_evals_to_best
        );
    }
    out
}

/// Writes run_<seed>.json, curve_<seed>.csv, summary.csv and stats.csv
/// under `dir` (created if needed).
pub fn write_run_artifacts(
    dir: &Path,
    rows: &[RunRow],
    stats: &[ConfigStats],
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let many_configs = stats.len() > 1;
    for r in rows {
        let prefix = if many_configs {
            format!("{}_", r.config_id)
        } else {
            String::new()
        };
        let json = serde_json::to_string_pretty(&r.record)
            .map_err(|e| CliError::Io(format!("serializing record: {e}")))?;
        write_atomic(&dir.join(format!("{prefix}run_{}.json", r.seed)), &json)?;
        write_atomic(&dir.join(format!("{prefix}curve_{}.csv", r.seed)), &curve_csv(r))?;
    }
    write_atomic(&dir.join("summary.csv"), &summary_csv(rows))?;
    write_atomic(&dir.join("stats.csv"), &stats_csv(stats))?;
    Ok(())
}
