use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{Algorithm, RunReport};
use crate::comm::CommPhase;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    row: &'static str,
    algorithm: Algorithm,
    p: usize,
    threads: usize,
    source: Option<u64>,
    levels: f64,
    reached: f64,
    edges_traversed: Option<u64>,
    time_s: f64,
    teps: f64,
    teps_harmonic_mean: Option<f64>,
    violations: usize,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Report(e.to_string())
}

/// JSON document, or CSV with one row per source followed by an
/// `aggregate` row.
pub fn report_to_string(report: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::Report(e.to_string()))
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &report.records {
                w.serialize(CsvRow {
                    row: "source",
                    algorithm: report.algorithm,
                    p: report.p,
                    threads: report.threads,
                    source: Some(r.source),
                    levels: r.levels as f64,
                    reached: r.reached as f64,
                    edges_traversed: Some(r.edges_traversed),
                    time_s: r.elapsed_s,
                    teps: r.teps,
                    teps_harmonic_mean: None,
                    violations: r.violations,
                })
                .map_err(csv_err)?;
            }
            let a = &report.aggregate;
            w.serialize(CsvRow {
                row: "aggregate",
                algorithm: report.algorithm,
                p: report.p,
                threads: report.threads,
                source: None,
                levels: a.mean_levels,
                reached: a.mean_reached,
                edges_traversed: None,
                time_s: a.mean_time_s,
                teps: a.teps_mean,
                teps_harmonic_mean: Some(a.teps_harmonic_mean),
                violations: report.validation.violations,
            })
            .map_err(csv_err)?;
            let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
        }
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &RunReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = report_to_string(report, format)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if format == ReportFormat::Json {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// One point of a scaling series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub algorithm: Algorithm,
    pub p: usize,
    pub p_r: usize,
    pub p_c: usize,
    pub threads: usize,
    pub mean_time_s: f64,
    pub teps_harmonic_mean: f64,
    /// Network words per search, averaged over the sources.
    pub words_per_search: f64,
    pub alltoall_words: u64,
    pub allgather_words: u64,
    pub transpose_words: u64,
    pub allreduce_words: u64,
}

/// Collects reports of the same graph into series keyed by algorithm and
/// ordered by `p`, as CSV text. Reports for different scales, edge factors
/// or vertex counts are rejected.
pub fn emit_plot_data(reports: &[RunReport]) -> Result<(Vec<PlotRow>, String)> {
    let Some(first) = reports.first() else {
        return Err(Error::Report("no reports to plot".into()));
    };
    for r in reports {
        if (r.scale, r.edgefactor, r.graph.n) != (first.scale, first.edgefactor, first.graph.n) {
            return Err(Error::Report(format!(
                "mixed graphs: scale {:?} edgefactor {:?} n {} vs scale {:?} edgefactor {:?} n {}",
                r.scale, r.edgefactor, r.graph.n, first.scale, first.edgefactor, first.graph.n
            )));
        }
    }
    let mut rows: Vec<PlotRow> = reports
        .iter()
        .map(|r| {
            let words = |ph| r.comm.as_ref().map_or(0, |c| c.phase(ph).words);
            let total = r.comm.as_ref().map_or(0, |c| c.network_words());
            PlotRow {
                algorithm: r.algorithm,
                p: r.p,
                p_r: r.p_r,
                p_c: r.p_c,
                threads: r.threads,
                mean_time_s: r.aggregate.mean_time_s,
                teps_harmonic_mean: r.aggregate.teps_harmonic_mean,
                words_per_search: total as f64 / r.aggregate.num_sources.max(1) as f64,
                alltoall_words: words(CommPhase::Alltoall),
                allgather_words: words(CommPhase::Allgather),
                transpose_words: words(CommPhase::Transpose),
                allreduce_words: words(CommPhase::Allreduce),
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.algorithm, r.p, r.threads));
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))?;
    Ok((rows, text))
}
