//! Runs configuration files end to end: data preparation, statistics,
//! evaluation and the results file.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{parse_config, resolve_data_path, ExperimentConfig, Platform};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, Protocol};
use crate::ingest::{binarize, prepare_workspace_in, DataOrigin};
use crate::table::{compute_stats, render_rating, DatasetStats};

/// The statistics block printed before each run.
pub fn format_stats(path: &Path, stats: &DatasetStats) -> String {
    format!(
        "== dataset statistics ==\n\
         path: {}\n\
         users: {}\n\
         items: {}\n\
         ratings: {}\n\
         dimensions: {}\n\
         conditions: {}\n\
         scale: {}..{}\n\
         mean: {:.6}\n\
         median: {}\n\
         mode: {}\n",
        path.display(),
        stats.num_users,
        stats.num_items,
        stats.num_ratings,
        stats.num_dimensions,
        stats.num_conditions,
        render_rating(stats.scale.min),
        render_rating(stats.scale.max),
        stats.mean,
        render_rating(stats.median),
        render_rating(stats.mode),
    )
}

pub fn format_report(report: &EvalReport, protocol: &Protocol) -> String {
    let protocol = match protocol {
        Protocol::CrossValidation { k, .. } => format!("{k}-fold cv"),
        Protocol::GivenRatio { ratio, .. } => format!("given-ratio {ratio}"),
    };
    format!(
        "== {} ({}, {protocol}) ==\n{}\nparams: {}\n",
        report.algorithm,
        report.task,
        report.format_metrics().replace(',', ", "),
        report.params
    )
}

/// `timestamp<TAB>algorithm<TAB>task<TAB>metrics<TAB>params`.
pub fn results_line(report: &EvalReport, timestamp: &str) -> String {
    format!(
        "{timestamp}\t{}\t{}\t{}\t{}",
        report.algorithm,
        report.task,
        report.format_metrics(),
        report.params
    )
}

/// Appends one results line to `path` and returns it.
pub fn write_results(report: &EvalReport, path: &Path) -> Result<String> {
    let timestamp = chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string();
    let line = results_line(report, &timestamp);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::from(e).in_file(path))?;
    writeln!(file, "{line}").map_err(|e| Error::from(e).in_file(path))?;
    Ok(line)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub report: EvalReport,
    pub results_file: PathBuf,
    pub line: String,
}

/// One configuration file. Relative data paths resolve against the file's
/// directory.
pub fn run_config(path: &Path, out: &mut dyn Write) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let config = parse_config(&text).map_err(|e| e.in_file(path))?;
    let data = resolve_data_path(&config, Platform::current())?;
    let data = if data.is_relative() {
        path.parent().unwrap_or(Path::new("")).join(data)
    } else {
        data
    };
    let prepared = prepare_workspace_in(&data, config.data_transformation, &config.output.folder)?;
    let table = binarize(&prepared.table, config.threshold);
    let stats = compute_stats(&table)?;
    writeln!(out, "config: {}", path.display())?;
    match prepared.origin {
        DataOrigin::Transformed(f) => writeln!(out, "data: {f:?} format, transformed")?,
        DataOrigin::Cache => writeln!(out, "data: cached binary")?,
    }
    write!(out, "{}", format_stats(&data, &stats))?;
    let report = evaluate(
        config.recommender,
        &table,
        &config.protocol,
        &config.eval_options(),
        &config.hp,
    )?;
    write!(out, "{}", format_report(&report, &config.protocol))?;
    let results_file = prepared.workspace.join(&config.output.results_file);
    let line = write_results(&report, &results_file)?;
    writeln!(out, "results appended to {}", results_file.display())?;
    Ok(RunOutcome {
        config,
        report,
        results_file,
        line,
    })
}

/// Runs every configuration in order, continuing past failures. Returns the
/// process exit code: 0 when all succeeded, 1 otherwise.
pub fn run(configs: &[PathBuf], out: &mut dyn Write) -> i32 {
    let mut code = 0;
    for path in configs {
        if let Err(e) = run_config(path, out) {
            log::error!("{}: {e}", path.display());
            let _ = writeln!(out, "failed: {}: {e}", path.display());
            code = 1;
        }
    }
    code
}
