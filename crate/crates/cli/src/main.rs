use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use graphwave::bench::{
    emit_plot_data, emit_report, run_benchmark, Algorithm, BackendChoice, GraphSpec, ReportFormat,
    RunConfig, RunReport,
};
use graphwave::comm::{ExecMode, TransposeMode};
use graphwave::cost::MachineParams;
use graphwave::graph::{EdgeListFormat, RmatParams};

/// Breadth-first search benchmarks on a simulated process grid.
#[derive(Parser)]
#[command(name = "graphwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run searches from several sources and report TEPS, traffic and validation.
    Run(RunArgs),
    /// Merge JSON reports of one graph into a CSV series keyed by algorithm and p.
    Plot {
        /// JSON reports written by `run`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_with::<Algorithm>)]
    algo: Algorithm,
    #[arg(long)]
    scale: Option<u32>,
    #[arg(long)]
    edgefactor: Option<u64>,
    /// Ranks; 2D runs pick the most square factorization.
    #[arg(long, conflicts_with = "grid")]
    p: Option<usize>,
    /// Process grid as RxC.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "auto", value_parser = parse_with::<BackendChoice>)]
    backend: BackendChoice,
    #[arg(long, default_value_t = 16)]
    sources: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge list to load instead of generating an R-MAT graph.
    #[arg(long, conflicts_with_all = ["scale", "edgefactor"])]
    input: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = parse_with::<EdgeListFormat>)]
    format: EdgeListFormat,
    /// Machine parameters (JSON or TOML) for the cost-model comparison.
    #[arg(long)]
    machine_params: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_with::<ReportFormat>)]
    out_format: ReportFormat,
    /// Include per-vertex distances and parents in the report.
    #[arg(long)]
    emit_vectors: bool,
    /// Also compare every distance vector against the serial search.
    #[arg(long)]
    validate: bool,
    /// Minimum fraction of vertices a source must reach.
    #[arg(long, default_value_t = 0.25)]
    min_component: f64,
    /// Send each target once per destination and level in 1D runs.
    #[arg(long)]
    dedup_sends: bool,
    #[arg(long, default_value = "auto", value_parser = parse_transpose)]
    transpose: TransposeMode,
}

fn parse_with<T: std::str::FromStr<Err = graphwave::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: graphwave::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxC, got '{s}'"))?;
    let r = r
        .trim()
        .parse()
        .map_err(|_| format!("bad row count in '{s}'"))?;
    let c = c
        .trim()
        .parse()
        .map_err(|_| format!("bad column count in '{s}'"))?;
    Ok((r, c))
}

fn parse_transpose(s: &str) -> Result<TransposeMode, String> {
    match s {
        "auto" => Ok(TransposeMode::Auto),
        "pairwise" => Ok(TransposeMode::Pairwise),
        "general" => Ok(TransposeMode::General),
        other => Err(format!("unknown transpose mode '{other}'")),
    }
}

fn config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let graph = match (&args.input, args.scale, args.edgefactor) {
        (Some(path), None, None) => GraphSpec::File {
            path: path.clone(),
            format: args.format,
        },
        (None, Some(scale), edgefactor) => GraphSpec::Rmat {
            params: RmatParams::graph500(scale, edgefactor.unwrap_or(16)),
        },
        (None, None, _) => bail!("give either --scale or --input"),
        _ => bail!("--input cannot be combined with generator parameters"),
    };
    let machine_params = match &args.machine_params {
        Some(path) => Some(
            MachineParams::load(path)
                .with_context(|| format!("loading machine parameters from {}", path.display()))?,
        ),
        None => None,
    };
    let mut cfg = RunConfig::rmat(args.algo, 1, 1);
    cfg.graph = graph;
    cfg.p = args.p.unwrap_or(1);
    cfg.grid = args.grid;
    cfg.threads = args.threads;
    cfg.backend = args.backend;
    cfg.num_sources = args.sources;
    cfg.seed = args.seed;
    cfg.min_component_fraction = args.min_component;
    cfg.dedup_sends = args.dedup_sends;
    cfg.transpose = args.transpose;
    cfg.cross_check = args.validate;
    cfg.emit_vectors = args.emit_vectors;
    cfg.machine_params = machine_params;
    cfg.mode = Some(ExecMode::from_env());
    Ok(cfg)
}

fn run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = config(args)?;
    let report = run_benchmark(&cfg)?;
    emit_report(&report, args.out_format, args.out.as_deref())?;
    let v = &report.validation;
    eprintln!(
        "{} p={} ({}x{}) t={}: {} sources, harmonic mean {:.3e} TEPS, mean time {:.3e} s",
        report.algorithm,
        report.p,
        report.p_r,
        report.p_c,
        report.threads,
        report.aggregate.num_sources,
        report.aggregate.teps_harmonic_mean,
        report.aggregate.mean_time_s
    );
    if !v.passed() {
        eprintln!(
            "validation failed: {} violations in {} of {} runs, {} oracle mismatches",
            v.violations,
            v.runs - v.valid_runs,
            v.runs,
            v.oracle_mismatches.unwrap_or(0)
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn plot(paths: &[PathBuf], out: Option<&PathBuf>) -> anyhow::Result<ExitCode> {
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let r: RunReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        reports.push(r);
    }
    let (_, csv) = emit_plot_data(&reports)?;
    match out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Plot { reports, out } => plot(reports, out.as_ref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
