//! Human-readable rendering of run artifacts.

use crate::manifest::RunManifest;
use crate::stages::{self, FrontComparison, TrainMetrics};
use anyhow::{Context, Result};
use certopt_core::RobustnessReport;
use std::path::Path;

pub fn print_certification(report: &RobustnessReport, history_len: usize) {
    println!("problem: {}", report.problem);
    println!(
        "subsample: {} of {} recorded evaluations ({:.2}%), seed {}",
        report.np,
        history_len,
        100.0 * report.np as f64 / history_len.max(1) as f64,
        report.seed
    );
    println!(
        "tolerance: |Rb| <= {} per objective ({}% confidence, z={}, E={}){}",
        report.epsilon,
        report.confidence * 100.0,
        report.spec.zscore,
        report.spec.e,
        if report.normalized { ", normalized objectives" } else { "" }
    );
    println!("{:<12} {:>12} {:>12} {:>8}", "objective", "Rb", "MAE", "status");
    for (j, o) in report.per_objective.iter().enumerate() {
        println!(
            "{:<12} {:>12.5} {:>12.5} {:>8}",
            format!("f{}", j + 1),
            o.rb,
            o.mae,
            if o.pass { "pass" } else { "FAIL" }
        );
    }
    println!("verdict: {}", report.verdict);
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Prints a summary of everything a run directory contains.
pub fn print_run_summary(dir: &Path, manifest: &RunManifest) -> Result<()> {
    println!("run {} (tool {})", manifest.run_id, manifest.tool_version);
    match &manifest.dtlz2_form {
        Some(form) => println!("problem: {} ({} form)", manifest.problem, form),
        None => println!("problem: {}", manifest.problem),
    }
    if !manifest.seeds.is_empty() {
        let seeds: Vec<String> = manifest
            .seeds
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        println!("stage seeds: {}", seeds.join(", "));
    }

    let mut metric_roles: Vec<&String> = manifest
        .artifacts
        .keys()
        .filter(|k| k.starts_with("metrics:"))
        .collect();
    metric_roles.sort();
    if !metric_roles.is_empty() {
        println!("\nsurrogates (normalized test metrics):");
        println!(
            "{:<8} {:<22} {:<6} {:>8} {:>8} {:>12} {:>12}",
            "target", "widths", "act", "params", "epochs", "test_mse", "test_mae"
        );
        for role in metric_roles {
            let m: TrainMetrics = read_json(&manifest.artifact_path(dir, role)?)?;
            let widths: Vec<String> = m.widths.iter().map(|w| w.to_string()).collect();
            println!(
                "{:<8} {:<22} {:<6} {:>8} {:>8} {:>12.2e} {:>12.2e}",
                m.target,
                widths.join("-"),
                m.activation,
                m.param_count,
                m.epochs_run,
                m.test_mse,
                m.test_mae
            );
        }
    }

    if manifest.artifacts.contains_key("archive") {
        let rows = stages::read_archive_csv(&manifest.artifact_path(dir, "archive")?)?;
        println!("\npareto archive: {} members (verified mutually nondominated)", rows.len());
    }
    if manifest.artifacts.contains_key("front_agreement") {
        let c: FrontComparison = read_json(&manifest.artifact_path(dir, "front_agreement")?)?;
        println!(
            "front agreement: GD {:.4}, hypervolume ratio {:.4} (surrogate {:.4} vs rigorous {:.4})",
            c.generational_distance, c.hypervolume_ratio, c.hypervolume_surrogate, c.hypervolume_rigorous
        );
    }
    if manifest.artifacts.contains_key("report") {
        let report: RobustnessReport = read_json(&manifest.artifact_path(dir, "report")?)?;
        let history_len = match manifest.artifact_path(dir, "history") {
            Ok(p) if p.is_file() => stages::read_history_csv(&p)?.len(),
            _ => 0,
        };
        println!();
        print_certification(&report, history_len);
    }
    Ok(())
}
