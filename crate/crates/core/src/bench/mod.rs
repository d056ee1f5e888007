//! Benchmark driver: build the graph, pick sources, run and validate each
//! search, and aggregate the results into a report.

mod report;

pub use report::{emit_plot_data, emit_report, report_to_string, PlotRow, ReportFormat};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bfs::{
    bfs_1d, bfs_2d, bfs_serial, prepare_2d, validate_bfs_tree, Bfs1dConfig, Bfs2dConfig, BfsOutput,
    VectorDist2D, UNREACHED,
};
use crate::comm::{CommStats, ExecMode, ProcGrid, TransposeMode};
use crate::cost::{
    compare_model_vs_measured, cost_1d, cost_2d, CostBreakdown, MachineParams, ModelComparison,
};
use crate::error::{Error, Result};
use crate::graph::{
    build_csr_1d, build_csr_partition, load_edge_list, rmat_generate, shuffle_vertices, symmetrize,
    EdgeList, EdgeListFormat, RmatParams,
};
use crate::sparse::{Backend, DEFAULT_HEAP_MIN_RANKS};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "serial")]
    Serial,
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "2d-diag")]
    TwoDDiagonal,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Serial => "serial",
            Algorithm::OneD => "1d",
            Algorithm::TwoD => "2d",
            Algorithm::TwoDDiagonal => "2d-diag",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Algorithm::Serial),
            "1d" => Ok(Algorithm::OneD),
            "2d" => Ok(Algorithm::TwoD),
            "2d-diag" | "2d-diagonal" => Ok(Algorithm::TwoDDiagonal),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Spa,
    Heap,
    Auto,
}

impl FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spa" => Ok(BackendChoice::Spa),
            "heap" => Ok(BackendChoice::Heap),
            "auto" => Ok(BackendChoice::Auto),
            other => Err(Error::Config(format!("unknown backend '{other}'"))),
        }
    }
}

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    Rmat {
        params: RmatParams,
    },
    File {
        path: PathBuf,
        format: EdgeListFormat,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub graph: GraphSpec,
    /// Ranks for `1d`; for `2d` without an explicit grid, the near-square
    /// factorization of `p` is used.
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<(usize, usize)>,
    pub threads: usize,
    pub backend: BackendChoice,
    pub heap_min_ranks: usize,
    pub num_sources: usize,
    pub seed: u64,
    /// Sources must reach at least this fraction of the vertices.
    pub min_component_fraction: f64,
    /// Consecutive rejected draws tolerated before giving up.
    pub max_draws: usize,
    pub dedup_sends: bool,
    pub transpose: TransposeMode,
    /// Also compare distances against the serial search.
    pub cross_check: bool,
    /// Keep per-vertex distances and parents in the report.
    pub emit_vectors: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine_params: Option<MachineParams>,
    #[serde(skip)]
    pub mode: Option<ExecMode>,
}

impl RunConfig {
    pub fn rmat(algorithm: Algorithm, scale: u32, edgefactor: u64) -> Self {
        RunConfig {
            algorithm,
            graph: GraphSpec::Rmat {
                params: RmatParams::graph500(scale, edgefactor),
            },
            p: 1,
            grid: None,
            threads: 1,
            backend: BackendChoice::Auto,
            heap_min_ranks: DEFAULT_HEAP_MIN_RANKS,
            num_sources: 16,
            seed: 1,
            min_component_fraction: 0.25,
            max_draws: 100,
            dedup_sends: false,
            transpose: TransposeMode::Auto,
            cross_check: false,
            emit_vectors: false,
            machine_params: None,
            mode: None,
        }
    }

    /// Grid the run uses: `p x 1` for 1D, `1 x 1` for serial.
    pub fn resolved_grid(&self) -> Result<ProcGrid> {
        match self.algorithm {
            Algorithm::Serial => ProcGrid::new(1, 1),
            Algorithm::OneD => {
                if self.grid.is_some_and(|(_, c)| c != 1) {
                    return Err(Error::Config("1D runs take --p, not a 2D grid".into()));
                }
                ProcGrid::new(self.grid.map_or(self.p, |(r, _)| r), 1)
            }
            Algorithm::TwoD | Algorithm::TwoDDiagonal => match self.grid {
                Some((r, c)) => ProcGrid::new(r, c),
                None => {
                    if self.p == 0 {
                        return Err(Error::Config("p must be at least 1".into()));
                    }
                    let r = (1..=self.p)
                        .take_while(|r| r * r <= self.p)
                        .filter(|r| self.p.is_multiple_of(*r))
                        .last()
                        .unwrap_or(1);
                    ProcGrid::new(r, self.p / r)
                }
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sources == 0 {
            return Err(Error::Config("need at least one source".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_component_fraction) {
            return Err(Error::Config(format!(
                "component fraction {} outside [0, 1]",
                self.min_component_fraction
            )));
        }
        if self.max_draws == 0 {
            return Err(Error::Config("max_draws must be at least 1".into()));
        }
        if let GraphSpec::Rmat { params } = &self.graph {
            params.validate()?;
        }
        let grid = self.resolved_grid()?;
        if self.algorithm == Algorithm::TwoDDiagonal && !grid.is_square() {
            return Err(Error::Unsupported(format!(
                "2d-diag needs a square grid, got {}x{}",
                grid.p_r(),
                grid.p_c()
            )));
        }
        Ok(())
    }

    fn backend(&self, ranks: usize) -> Backend {
        match self.backend {
            BackendChoice::Spa => Backend::Spa,
            BackendChoice::Heap => Backend::Heap,
            BackendChoice::Auto => Backend::Auto {
                ranks,
                heap_min_ranks: self.heap_min_ranks,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub n: u64,
    /// Edges as generated or loaded, duplicates and self-loops included.
    pub input_edges: u64,
    /// Distinct directed non-loop input edges: the TEPS edge universe.
    pub original_edges: u64,
    /// Nonzeros of the symmetric adjacency matrix without self-loops.
    pub symmetric_nnz: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    /// Source id after vertex shuffling.
    pub source: u64,
    /// Same vertex before shuffling.
    pub source_original: u64,
    pub levels: u64,
    pub reached: u64,
    /// Original directed edges with both endpoints reached.
    pub edges_traversed: u64,
    pub elapsed_s: f64,
    /// `edges_traversed / elapsed_s`.
    pub teps: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub num_sources: usize,
    /// Arithmetic mean of the search times.
    pub mean_time_s: f64,
    /// Arithmetic mean of the per-source rates.
    pub teps_mean: f64,
    /// Harmonic mean of the per-source rates.
    pub teps_harmonic_mean: f64,
    pub mean_levels: f64,
    pub mean_reached: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub runs: usize,
    pub valid_runs: usize,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_kind: BTreeMap<String, usize>,
    /// Runs whose distances differ from the serial search (cross-check only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_mismatches: Option<usize>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.oracle_mismatches.unwrap_or(0) == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub params: MachineParams,
    pub breakdown: CostBreakdown,
    /// Measured counters of the first source's search against the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ModelComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Timings come from a single-machine simulation of the process grid.
    pub simulated: bool,
    pub algorithm: Algorithm,
    pub p: usize,
    pub p_r: usize,
    pub p_c: usize,
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edgefactor: Option<u64>,
    pub seed: u64,
    pub config: RunConfig,
    pub graph: GraphInfo,
    pub records: Vec<SourceRecord>,
    pub aggregate: Aggregate,
    /// Communication summed over all sources; absent for serial runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comm: Option<CommStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    pub validation: ValidationSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<BfsOutput>,
}

impl RunReport {
    /// Copy with every wall-clock derived field zeroed, for comparing runs.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.elapsed_s = 0.0;
            rec.teps = 0.0;
        }
        r.aggregate.mean_time_s = 0.0;
        r.aggregate.teps_mean = 0.0;
        r.aggregate.teps_harmonic_mean = 0.0;
        r
    }
}

/// Traversed edges per second; wall-clock readings of zero are raised to one
/// nanosecond so the rate stays finite.
pub fn teps(edges: u64, elapsed_s: f64) -> f64 {
    edges as f64 / elapsed_s.max(1e-9)
}

pub fn harmonic_mean(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    values.len() as f64 / values.iter().map(|v| 1.0 / v).sum::<f64>()
}

/// Size of the connected component of every vertex.
pub fn component_sizes(g: &EdgeList) -> Vec<u64> {
    let n = g.n as usize;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in &g.edges {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut size = vec![0u64; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        size[r] += 1;
    }
    (0..n).map(|v| size[find(&mut parent, v)]).collect()
}

/// Draws `k` distinct sources uniformly among vertices whose component holds
/// at least `fraction * n` vertices. Duplicates count as rejections; more
/// than `max_draws` consecutive rejections is an error.
pub fn choose_sources(
    g: &EdgeList,
    k: usize,
    fraction: f64,
    max_draws: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    if g.n == 0 {
        return Err(Error::ComponentTooSmall { draws: 0 });
    }
    let sizes = component_sizes(g);
    let threshold = fraction * g.n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<u64> = Vec::with_capacity(k);
    let mut rejected = 0;
    while chosen.len() < k {
        let v = rng.gen_range(0..g.n);
        if (sizes[v as usize] as f64) < threshold || chosen.contains(&v) {
            rejected += 1;
            if rejected >= max_draws {
                return Err(Error::ComponentTooSmall { draws: rejected });
            }
            continue;
        }
        rejected = 0;
        chosen.push(v);
    }
    Ok(chosen)
}

/// Seeds derived from the run seed for the independent random steps.
fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

enum Engine {
    Serial,
    OneD(Vec<crate::graph::CsrGraph>, Bfs1dConfig),
    TwoD(ProcGrid, Vec<crate::sparse::Dcsc>, Bfs2dConfig),
}

/// Generate or load, symmetrize, shuffle, partition, then search from
/// `num_sources` sources and validate every result.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let grid = cfg.resolved_grid()?;
    let mode = cfg.mode.unwrap_or_else(ExecMode::from_env);

    let (input, scale, edgefactor) = match &cfg.graph {
        GraphSpec::Rmat { params } => (
            rmat_generate(params, sub_seed(cfg.seed, 0))?,
            Some(params.scale),
            Some(params.edgefactor),
        ),
        GraphSpec::File { path, format } => (load_edge_list(path, *format)?, None, None),
    };
    let (g, perm) = shuffle_vertices(&symmetrize(&input), sub_seed(cfg.seed, 1));
    let mut original: Vec<(u64, u64)> = input
        .edges
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| (perm.apply(u), perm.apply(v)))
        .collect();
    original.sort_unstable();
    original.dedup();
    drop(input);

    let whole = build_csr_1d(&g, 0, 1)?;
    let graph = GraphInfo {
        n: g.n,
        input_edges: g.original_edge_count.unwrap_or(0),
        original_edges: original.len() as u64,
        symmetric_nnz: whole.nnz() as u64,
    };
    let sources = choose_sources(
        &g,
        cfg.num_sources,
        cfg.min_component_fraction,
        cfg.max_draws,
        sub_seed(cfg.seed, 2),
    )?;

    let engine = match cfg.algorithm {
        Algorithm::Serial => Engine::Serial,
        Algorithm::OneD => Engine::OneD(
            build_csr_partition(&g, grid.size())?,
            Bfs1dConfig {
                threads: cfg.threads,
                dedup_sends: cfg.dedup_sends,
                mode,
            },
        ),
        Algorithm::TwoD | Algorithm::TwoDDiagonal => Engine::TwoD(
            grid,
            prepare_2d(&g, grid)?,
            Bfs2dConfig {
                dist: if cfg.algorithm == Algorithm::TwoD {
                    VectorDist2D::TwoD
                } else {
                    VectorDist2D::Diagonal
                },
                threads: cfg.threads,
                backend: cfg.backend(grid.size()),
                transpose: cfg.transpose,
                mode,
            },
        ),
    };

    let mut records = Vec::with_capacity(sources.len());
    let mut comm: Option<CommStats> = None;
    let mut first_stats: Option<CommStats> = None;
    let mut validation = ValidationSummary {
        oracle_mismatches: cfg.cross_check.then_some(0),
        ..Default::default()
    };
    let mut vectors = Vec::new();
    for &s in &sources {
        let start = Instant::now();
        let (out, stats) = match &engine {
            Engine::Serial => (bfs_serial(&whole, s)?, None),
            Engine::OneD(parts, c) => {
                let run = bfs_1d(parts, s, c)?;
                (run.output, Some(run.stats))
            }
            Engine::TwoD(grid, blocks, c) => {
                let run = bfs_2d(*grid, g.n, blocks, s, c)?;
                (run.output, Some(run.stats))
            }
        };
        let elapsed_s = start.elapsed().as_secs_f64();

        let report = validate_bfs_tree(&whole, s, &out)?;
        validation.runs += 1;
        validation.violations += report.violations.len();
        if report.is_valid() {
            validation.valid_runs += 1;
        }
        for v in &report.violations {
            *validation.by_kind.entry(v.kind().to_string()).or_default() += 1;
        }
        if let Some(mismatches) = validation.oracle_mismatches.as_mut() {
            if bfs_serial(&whole, s)?.distances != out.distances {
                *mismatches += 1;
            }
        }

        let d = &out.distances;
        let edges_traversed = original
            .iter()
            .filter(|&&(u, v)| d[u as usize] != UNREACHED && d[v as usize] != UNREACHED)
            .count() as u64;
        if let Some(stats) = stats {
            match comm.as_mut() {
                Some(total) => total.accumulate(&stats),
                None => comm = Some(stats.clone()),
            }
            first_stats.get_or_insert(stats);
        }
        records.push(SourceRecord {
            source: s,
            source_original: perm.invert(s),
            levels: out.levels,
            reached: out.reached,
            edges_traversed,
            elapsed_s,
            teps: teps(edges_traversed, elapsed_s),
            violations: report.violations.len(),
        });
        if cfg.emit_vectors {
            vectors.push(BfsOutput {
                edges_traversed,
                ..out
            });
        }
    }

    let k = records.len() as f64;
    let rates: Vec<f64> = records.iter().map(|r| r.teps).collect();
    let aggregate = Aggregate {
        num_sources: records.len(),
        mean_time_s: records.iter().map(|r| r.elapsed_s).sum::<f64>() / k,
        teps_mean: rates.iter().sum::<f64>() / k,
        teps_harmonic_mean: harmonic_mean(&rates),
        mean_levels: records.iter().map(|r| r.levels as f64).sum::<f64>() / k,
        mean_reached: records.iter().map(|r| r.reached as f64).sum::<f64>() / k,
    };

    let model = match &cfg.machine_params {
        None => None,
        Some(mp) => {
            let (n, m) = (graph.n as f64, graph.symmetric_nnz as f64);
            let breakdown = match cfg.algorithm {
                Algorithm::Serial => cost_1d(n, m, cfg.threads as f64, cfg.threads, mp)?,
                Algorithm::OneD => {
                    cost_1d(n, m, (grid.size() * cfg.threads) as f64, cfg.threads, mp)?
                }
                Algorithm::TwoD | Algorithm::TwoDDiagonal => {
                    cost_2d(n, m, grid.p_r(), grid.p_c(), mp)?
                }
            };
            let comparison = match &first_stats {
                Some(stats) => Some(compare_model_vs_measured(&breakdown, stats)?),
                None => None,
            };
            Some(ModelSection {
                params: mp.clone(),
                breakdown,
                comparison,
            })
        }
    };

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        simulated: true,
        algorithm: cfg.algorithm,
        p: grid.size(),
        p_r: grid.p_r(),
        p_c: grid.p_c(),
        threads: cfg.threads,
        scale,
        edgefactor,
        seed: cfg.seed,
        config: cfg.clone(),
        graph,
        records,
        aggregate,
        comm,
        model,
        validation,
        vectors,
    })
}
