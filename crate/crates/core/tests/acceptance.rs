//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p graphwave --test acceptance`.
//!
//! The process exits non-zero when a criterion fails, except for the R-MAT
//! frequency check against the literal tuple (0.59, 0.19, 0.19, 0.05): that
//! tuple sums to 1.02, so no generator can meet it. Its line still reads FAIL.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use graphwave::bench::{choose_sources, run_benchmark, Algorithm, BackendChoice, RunConfig};
use graphwave::bfs::{
    bfs_1d, bfs_2d, bfs_serial, measure_merge_imbalance, prepare_2d, validate_bfs_tree,
    Bfs1dConfig, Bfs2dConfig, BfsOutput, VectorDist2D, UNREACHED,
};
use graphwave::comm::{CommPhase, ExecMode, ProcGrid};
use graphwave::cost::{cost_1d, cost_2d, AlphaL, BetaKind, BetaN, MachineParams};
use graphwave::graph::{
    build_csr_1d, build_csr_partition, rmat_generate, shuffle_vertices, symmetrize, BlockPartition,
    CsrGraph, EdgeList, RmatParams,
};
use graphwave::sparse::{spmsv, Backend, Dcsc, SparseVector};

struct Outcome {
    name: &'static str,
    pass: bool,
    /// Failure that cannot be fixed without breaking the generator contract.
    known: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        name,
        pass,
        known: false,
        detail,
    }
}

/// Running tally of validated searches shared by the criteria.
#[derive(Default)]
struct Validated {
    runs: usize,
    violations: usize,
}

impl Validated {
    fn check(&mut self, g: &CsrGraph, s: u64, out: &BfsOutput) {
        let r = validate_bfs_tree(g, s, out).expect("validation input");
        self.runs += 1;
        self.violations += r.violations.len();
    }

    fn merge(&mut self, o: Validated) {
        self.runs += o.runs;
        self.violations += o.violations;
    }
}

/// Symmetrized, shuffled R-MAT graph.
fn prepared(scale: u32, edgefactor: u64, seed: u64) -> EdgeList {
    let raw = rmat_generate(&RmatParams::graph500(scale, edgefactor), seed).unwrap();
    shuffle_vertices(&symmetrize(&raw), seed ^ 0x5eed).0
}

fn cfg_1d(threads: usize) -> Bfs1dConfig {
    Bfs1dConfig {
        threads,
        dedup_sends: false,
        mode: ExecMode::Concurrent,
    }
}

fn cfg_2d(grid: ProcGrid, dist: VectorDist2D, backend: Backend) -> Bfs2dConfig {
    Bfs2dConfig {
        dist,
        backend,
        mode: ExecMode::Concurrent,
        ..Bfs2dConfig::new(grid)
    }
}

fn oracle_equivalence(validated: &mut Validated) -> Outcome {
    const GRAPHS: u64 = 100;
    let start = Instant::now();
    let grids = [(1, 1), (2, 2), (4, 4), (2, 4)];
    let results: Vec<(usize, usize, Vec<String>, Validated)> = (0..GRAPHS)
        .into_par_iter()
        .map(|seed| {
            let g = prepared(10, 16, 1000 + seed);
            let whole = build_csr_1d(&g, 0, 1).unwrap();
            let sources = choose_sources(&g, 4, 0.25, 100, seed).unwrap();
            let parts: Vec<(usize, Vec<CsrGraph>)> = [1, 2, 4, 8]
                .iter()
                .map(|&p| (p, build_csr_partition(&g, p).unwrap()))
                .collect();
            let blocks: Vec<(ProcGrid, Vec<Dcsc>)> = grids
                .iter()
                .map(|&(r, c)| {
                    let grid = ProcGrid::new(r, c).unwrap();
                    (grid, prepare_2d(&g, grid).unwrap())
                })
                .collect();
            let (mut runs, mut mismatches, mut bad) = (0, 0, Vec::new());
            let mut v = Validated::default();
            for &s in &sources {
                let oracle = bfs_serial(&whole, s).unwrap();
                v.check(&whole, s, &oracle);
                let mut outputs: Vec<(String, BfsOutput)> = Vec::new();
                for (p, parts) in &parts {
                    for t in [1, 4] {
                        let run = bfs_1d(parts, s, &cfg_1d(t)).unwrap();
                        outputs.push((format!("1d p={p} t={t}"), run.output));
                    }
                }
                for (grid, blocks) in &blocks {
                    for backend in [Backend::Spa, Backend::Heap] {
                        let c = cfg_2d(*grid, VectorDist2D::TwoD, backend);
                        let run = bfs_2d(*grid, g.n, blocks, s, &c).unwrap();
                        let name =
                            format!("2d {}x{} {:?}", grid.p_r(), grid.p_c(), backend.kernel());
                        outputs.push((name, run.output));
                    }
                }
                for (name, out) in outputs {
                    runs += 1;
                    v.check(&whole, s, &out);
                    if out.distances != oracle.distances {
                        mismatches += 1;
                        bad.push(format!("seed {seed} source {s} {name}"));
                    }
                }
            }
            (runs, mismatches, bad, v)
        })
        .collect();
    let elapsed = start.elapsed();
    let (mut runs, mut mismatches, mut bad) = (0, 0, Vec::new());
    for (r, m, b, v) in results {
        runs += r;
        mismatches += m;
        bad.extend(b);
        validated.merge(v);
    }
    let in_time = elapsed < Duration::from_secs(300);
    let mut detail = format!(
        "{runs} distributed searches on {GRAPHS} graphs, {mismatches} differ from serial, {:.1} s",
        elapsed.as_secs_f64()
    );
    if let Some(first) = bad.first() {
        detail.push_str(&format!("; first mismatch: {first}"));
    }
    outcome("oracle_equivalence", mismatches == 0 && in_time, detail)
}

/// Dense (select, max) product: row r takes the largest frontier value over
/// the frontier columns it is adjacent to.
fn dense_select_max(
    nrows: usize,
    ncols: usize,
    entries: &[(u64, u64)],
    f: &[(u64, u64)],
) -> Vec<(u64, u64)> {
    let mut a = vec![false; nrows * ncols];
    for &(r, c) in entries {
        a[r as usize * ncols + c as usize] = true;
    }
    let mut x = vec![None; ncols];
    for &(c, v) in f {
        x[c as usize] = Some(v);
    }
    let mut out = Vec::new();
    for r in 0..nrows {
        let best = (0..ncols)
            .filter(|&c| a[r * ncols + c])
            .filter_map(|c| x[c])
            .max();
        if let Some(v) = best {
            out.push((r as u64, v));
        }
    }
    out
}

fn spmsv_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut total_nnz = 0;
    for _ in 0..1000 {
        let nrows = rng.gen_range(1..=256usize);
        let ncols = rng.gen_range(1..=256usize);
        let density = rng.gen_range(0.0..0.1);
        let count = (density * (nrows * ncols) as f64) as usize;
        let entries: Vec<(u64, u64)> = (0..count)
            .map(|_| {
                (
                    rng.gen_range(0..nrows as u64),
                    rng.gen_range(0..ncols as u64),
                )
            })
            .collect();
        total_nnz += entries.len();
        let frac = rng.gen_range(0.0..1.0);
        let mut f: Vec<(u64, u64)> = Vec::new();
        for c in 0..ncols as u64 {
            if rng.gen_bool(frac) {
                f.push((c, rng.gen_range(0..1_000_000)));
            }
        }
        let d = Dcsc::from_entries(nrows as u64, ncols as u64, entries.iter().copied()).unwrap();
        let fv = SparseVector::from_pairs(f.iter().copied()).unwrap();
        let spa: Vec<(u64, u64)> = spmsv(&d, &fv, Backend::Spa).unwrap().iter().collect();
        let heap: Vec<(u64, u64)> = spmsv(&d, &fv, Backend::Heap).unwrap().iter().collect();
        let dense = dense_select_max(nrows, ncols, &entries, &f);
        if spa != dense || heap != dense {
            failures += 1;
        }
    }
    outcome(
        "spmsv_backend_equivalence",
        failures == 0,
        format!(
            "1000 random blocks ({total_nnz} entries), {failures} disagree with the dense oracle"
        ),
    )
}

fn one_d_comm_oracle(validated: &mut Validated) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    for i in 0..20 {
        let scale = rng.gen_range(6..=10);
        let ef = rng.gen_range(2..=16);
        let p = rng.gen_range(1..=8);
        let t = rng.gen_range(1..=4);
        let g = prepared(scale, ef, 2000 + i);
        let whole = build_csr_1d(&g, 0, 1).unwrap();
        let s = choose_sources(&g, 1, 0.25, 100, i).unwrap()[0];
        let run = bfs_1d(&build_csr_partition(&g, p).unwrap(), s, &cfg_1d(t)).unwrap();
        validated.check(&whole, s, &run.output);

        let part = BlockPartition::new(g.n, p).unwrap();
        let expected: u64 = (0..g.n)
            .filter(|&u| run.output.distances[u as usize] != UNREACHED)
            .map(|u| {
                let own = part.owner(u);
                whole
                    .neighbors(u)
                    .iter()
                    .filter(|&&v| part.owner(v) != own)
                    .count() as u64
            })
            .sum();
        let got = run.stats.phase(CommPhase::Alltoall).words;
        if got != expected || !run.stats.is_conserved() {
            failures.push(format!(
                "scale {scale} ef {ef} p {p} t {t}: {got} words, expected {expected}"
            ));
        }
    }
    outcome(
        "one_d_comm_oracle",
        failures.is_empty(),
        if failures.is_empty() {
            "20 configurations, alltoall words equal the non-local adjacencies of reached vertices"
                .into()
        } else {
            failures.join("; ")
        },
    )
}

fn two_d_expand_oracle(validated: &mut Validated) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut failures = Vec::new();
    let mut worst_fold = 0.0f64;
    let mut worst_diag_recv = 0.0f64;
    for i in 0..20 {
        let scale = rng.gen_range(6..=10);
        let ef = rng.gen_range(2..=16);
        let (p_r, p_c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let t = rng.gen_range(1..=3);
        let backend = if rng.gen_bool(0.5) {
            Backend::Spa
        } else {
            Backend::Heap
        };
        let grid = ProcGrid::new(p_r, p_c).unwrap();
        let dist = if grid.is_square() && rng.gen_bool(0.5) {
            VectorDist2D::Diagonal
        } else {
            VectorDist2D::TwoD
        };
        let g = prepared(scale, ef, 3000 + i);
        let whole = build_csr_1d(&g, 0, 1).unwrap();
        let s = choose_sources(&g, 1, 0.25, 100, i).unwrap()[0];
        let blocks = prepare_2d(&g, grid).unwrap();
        let cfg = Bfs2dConfig {
            threads: t,
            ..cfg_2d(grid, dist, backend)
        };
        let run = bfs_2d(grid, g.n, &blocks, s, &cfg).unwrap();
        validated.check(&whole, s, &run.output);

        let gathered = run.stats.phase(CommPhase::Allgather).input_words;
        if gathered != run.output.reached {
            failures.push(format!(
                "{p_r}x{p_c} {dist:?}: allgather input {gathered}, reached {}",
                run.output.reached
            ));
        }
        // Every rank injects at most m/p fold words. Under the two_d layout
        // the same holds for what a rank receives; the diagonal layout funnels
        // a whole processor row into one rank, which the imbalance criterion
        // measures instead.
        let bound = whole.nnz() as f64 / grid.size() as f64;
        for r in &run.stats.per_rank {
            let sent = r.sent.get(CommPhase::Alltoall);
            let received = r.received.get(CommPhase::Alltoall);
            let fold = match dist {
                VectorDist2D::TwoD => sent.max(received),
                VectorDist2D::Diagonal => {
                    worst_diag_recv = worst_diag_recv.max(received as f64 / bound);
                    sent
                }
            };
            worst_fold = worst_fold.max(fold as f64 / bound);
            if fold as f64 > bound {
                failures.push(format!(
                    "{p_r}x{p_c} {dist:?}: rank {} fold words {fold} > m/p = {bound:.1}",
                    r.rank
                ));
            }
        }
    }
    outcome(
        "two_d_expand_oracle",
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "20 configurations, allgather input = reached; largest per-rank fold / (m/p) = {worst_fold:.3} (diagonal receivers up to {worst_diag_recv:.3})"
            )
        } else {
            failures.join("; ")
        },
    )
}

fn diagonal_imbalance(validated: &mut Validated) -> Outcome {
    let grid = ProcGrid::new(4, 4).unwrap();
    let mut problems = Vec::new();
    let mut shares = Vec::new();
    for seed in 0..5 {
        let g = prepared(10, 16, 4000 + seed);
        let whole = build_csr_1d(&g, 0, 1).unwrap();
        let blocks = prepare_2d(&g, grid).unwrap();
        for s in choose_sources(&g, 4, 0.25, 100, seed).unwrap() {
            let diag = cfg_2d(grid, VectorDist2D::Diagonal, Backend::Spa);
            let run = bfs_2d(grid, g.n, &blocks, s, &diag).unwrap();
            validated.check(&whole, s, &run.output);
            let m = measure_merge_imbalance(grid, &run).unwrap();
            shares.push(m.diagonal_share);
            let off: u64 = m
                .per_rank
                .iter()
                .enumerate()
                .filter(|&(r, _)| {
                    let (i, j) = grid.coords(r);
                    i != j
                })
                .map(|(_, &c)| c)
                .sum();
            if off != 0 || m.total == 0 {
                problems.push(format!("seed {seed} source {s}: {off} off-diagonal merges"));
            }

            let two_d = cfg_2d(grid, VectorDist2D::TwoD, Backend::Spa);
            let run = bfs_2d(grid, g.n, &blocks, s, &two_d).unwrap();
            validated.check(&whole, s, &run.output);
            for i in 0..grid.p_r() {
                let row = grid.row_group(i);
                let bearing = row
                    .members()
                    .iter()
                    .any(|&r| run.local_out[r].iter().any(|&x| x > 0));
                if !bearing {
                    continue;
                }
                for &r in row.members() {
                    if run.merge_ops[r].iter().all(|&x| x == 0) {
                        problems.push(format!("seed {seed} source {s}: rank {r} never merges"));
                    }
                }
            }
        }
    }
    let min_share = shares.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        "diagonal_imbalance",
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{} searches on 4x4: diagonal share of merges >= {min_share}, every rank of a frontier-bearing row merges under two_d",
                shares.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

fn rmat_statistics() -> Vec<Outcome> {
    let params = RmatParams::graph500(14, 16);
    let g = rmat_generate(&params, 42).unwrap();
    let half = 1u64 << 13;
    let mut counts = [0u64; 4];
    for &(u, v) in &g.edges {
        counts[((u >= half) as usize) << 1 | (v >= half) as usize] += 1;
    }
    let freq: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / g.edges.len() as f64)
        .collect();
    let show = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let check = |target: [f64; 4]| -> (bool, Vec<usize>) {
        let off: Vec<usize> = (0..4)
            .filter(|&q| (freq[q] - target[q]).abs() > 0.01)
            .collect();
        (off.is_empty(), off)
    };

    let literal = [0.59, 0.19, 0.19, 0.05];
    let (ok, off) = check(literal);
    let names = ["a", "b", "c", "d"];
    let mut lit = outcome(
        "rmat_frequencies_literal",
        ok,
        format!(
            "observed ({}) vs (0.59, 0.19, 0.19, 0.05) +- 0.01; off in [{}]",
            show(&freq),
            off.iter().map(|&q| names[q]).collect::<Vec<_>>().join(", ")
        ),
    );
    if !ok {
        lit.known = true;
        lit.detail.push_str(
            "; the literal tuple sums to 1.02 and cannot be sampled, the generator uses a = 0.57",
        );
    }
    let configured = [params.a, params.b, params.c, params.d];
    let (ok, _) = check(configured);
    let conf = outcome(
        "rmat_frequencies_configured",
        ok,
        format!(
            "observed ({}) vs configured ({}) +- 0.01",
            show(&freq),
            show(&configured)
        ),
    );
    let want = 16u64 << 14;
    let count = outcome(
        "rmat_edge_count",
        g.edges.len() as u64 == want,
        format!("{} edges, expected {want}", g.edges.len()),
    );
    vec![lit, conf, count]
}

/// Hand substitution of the published cost formulas.
mod oracle {
    use super::*;

    pub fn alpha(steps: &[(f64, f64)], x: f64) -> f64 {
        for &(size, value) in steps {
            if x <= size {
                return value;
            }
        }
        steps[steps.len() - 1].1
    }

    pub fn beta(b: &BetaN, p: f64) -> f64 {
        match b.kind {
            BetaKind::Constant => b.coefficient,
            BetaKind::Torus => b.coefficient * p.powf(1.0 / 3.0),
            BetaKind::Ring => b.coefficient * p,
        }
    }

    /// (local, network)
    pub fn one_d(n: f64, m: f64, p: f64, t: f64, mp: &MachineParams) -> (f64, f64) {
        let q = p / t;
        let steps = mp.alpha_l.steps();
        let local = m / q * mp.beta_l + n / q * alpha(steps, n / q) + m / q * alpha(steps, n / q);
        let net = if q > 1.0 {
            q * mp.alpha_n + m / q * beta(&mp.beta_n_a2a, q)
        } else {
            0.0
        };
        (local, net)
    }

    pub fn two_d(n: f64, m: f64, pr: f64, pc: f64, mp: &MachineParams) -> (f64, f64) {
        let p = pr * pc;
        let steps = mp.alpha_l.steps();
        let local = m / p * mp.beta_l + n / p * alpha(steps, n / pc) + m / p * alpha(steps, n / pr);
        let mut net = 0.0;
        if pr > 1.0 {
            net += pr * mp.alpha_n + n / pc * beta(&mp.beta_n_ag, pr);
        }
        if pc > 1.0 {
            net += pc * mp.alpha_n + m / p * beta(&mp.beta_n_a2a, pc);
        }
        (local, net)
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> MachineParams {
    let mut size = 0.0;
    let mut value = rng.gen_range(1e-10..1e-8);
    let steps: Vec<(f64, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            size += rng.gen_range(1e3..1e7);
            value *= rng.gen_range(1.0..3.0);
            (size, value)
        })
        .collect();
    let beta = |rng: &mut ChaCha8Rng| BetaN {
        kind: [BetaKind::Constant, BetaKind::Torus, BetaKind::Ring][rng.gen_range(0..3)],
        coefficient: rng.gen_range(1e-10..1e-8),
    };
    MachineParams {
        alpha_l: AlphaL::new(steps).unwrap(),
        beta_l: rng.gen_range(1e-10..1e-8),
        alpha_n: rng.gen_range(1e-7..1e-5),
        beta_n_a2a: beta(rng),
        beta_n_ag: beta(rng),
        beta_n_p2p: beta(rng),
    }
}

fn cost_fidelity() -> Outcome {
    let rel = |a: f64, b: f64| {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mp = random_params(&mut rng);
        let n = 2f64.powi(rng.gen_range(10..=32));
        let m = n * rng.gen_range(2..=64) as f64;
        let t = rng.gen_range(1..=8);
        let p = (t * rng.gen_range(1..=4096)) as f64;
        let (p_r, p_c) = (rng.gen_range(1..=128), rng.gen_range(1..=128));

        let c1 = cost_1d(n, m, p, t, &mp).unwrap();
        let (l1, n1) = oracle::one_d(n, m, p, t as f64, &mp);
        let c2 = cost_2d(n, m, p_r, p_c, &mp).unwrap();
        let (l2, n2) = oracle::two_d(n, m, p_r as f64, p_c as f64, &mp);
        for (got, want) in [
            (c1.local_mem, l1),
            (c1.comm(), n1),
            (c1.total, l1 + n1),
            (c2.local_mem, l2),
            (c2.comm(), n2),
            (c2.total, l2 + n2),
        ] {
            worst = worst.max(rel(got, want));
        }
    }
    let mp = random_params(&mut rng);
    let degenerate = [
        cost_1d(1e6, 1.6e7, 1.0, 1, &mp).unwrap().comm(),
        cost_1d(1e6, 1.6e7, 4.0, 4, &mp).unwrap().comm(),
        cost_2d(1e6, 1.6e7, 1, 1, &mp).unwrap().comm(),
    ];
    let zero = degenerate.iter().all(|&c| c == 0.0);
    outcome(
        "cost_model_fidelity",
        worst <= 1e-12 && zero,
        format!(
            "20 random tuples, worst relative error {worst:.2e}; single-process network cost {degenerate:?}"
        ),
    )
}

fn validation_suite(validated: &Validated) -> Outcome {
    let g = prepared(9, 8, 5000);
    let whole = build_csr_1d(&g, 0, 1).unwrap();
    let s = choose_sources(&g, 1, 0.25, 100, 0).unwrap()[0];
    let good = bfs_serial(&whole, s).unwrap();
    let d = &good.distances;
    // A reached vertex at level >= 2 and a vertex two levels above it.
    let deep = (0..g.n)
        .find(|&v| d[v as usize] != UNREACHED && d[v as usize] >= 2)
        .unwrap();
    let far = (0..g.n)
        .find(|&u| {
            d[u as usize].checked_add(2) == Some(d[deep as usize]) && !whole.has_edge(u, deep)
        })
        .unwrap();

    let mut faults: BTreeMap<&str, BfsOutput> = BTreeMap::new();
    let mut f = good.clone();
    f.parents[deep as usize] = far;
    faults.insert("non_edge_parent", f);
    let mut f = good.clone();
    f.distances[deep as usize] += 1;
    faults.insert("level_gap", f);
    let mut f = good.clone();
    f.parents[deep as usize] = UNREACHED;
    faults.insert("missing_parent", f);
    let mut f = good.clone();
    f.distances[s as usize] = 1;
    faults.insert("source_distance", f);

    let mut missed = Vec::new();
    for (kind, out) in &faults {
        let r = validate_bfs_tree(&whole, s, out).unwrap();
        if r.count(kind) == 0 {
            missed.push(*kind);
        }
    }
    let clean = validate_bfs_tree(&whole, s, &good).unwrap().is_valid();
    outcome(
        "validation_suite",
        validated.violations == 0 && missed.is_empty() && clean && validated.runs > 0,
        format!(
            "{} accepted searches with {} violations; injected faults detected {}/4{}",
            validated.runs,
            validated.violations,
            4 - missed.len(),
            if missed.is_empty() {
                String::new()
            } else {
                format!(", missed {missed:?}")
            }
        ),
    )
}

fn determinism() -> Outcome {
    let configs: Vec<RunConfig> = vec![
        RunConfig {
            num_sources: 4,
            ..RunConfig::rmat(Algorithm::Serial, 9, 16)
        },
        RunConfig {
            p: 4,
            threads: 4,
            num_sources: 4,
            ..RunConfig::rmat(Algorithm::OneD, 9, 16)
        },
        RunConfig {
            p: 8,
            num_sources: 4,
            dedup_sends: true,
            ..RunConfig::rmat(Algorithm::OneD, 9, 16)
        },
        RunConfig {
            grid: Some((2, 4)),
            threads: 2,
            backend: BackendChoice::Heap,
            num_sources: 4,
            ..RunConfig::rmat(Algorithm::TwoD, 9, 16)
        },
        RunConfig {
            grid: Some((4, 4)),
            num_sources: 4,
            ..RunConfig::rmat(Algorithm::TwoD, 9, 16)
        },
        RunConfig {
            grid: Some((3, 3)),
            num_sources: 4,
            machine_params: Some(MachineParams::unit()),
            ..RunConfig::rmat(Algorithm::TwoDDiagonal, 9, 16)
        },
    ];
    let mut differ = Vec::new();
    for (i, base) in configs.iter().enumerate() {
        let base = RunConfig {
            emit_vectors: true,
            seed: 100 + i as u64,
            ..base.clone()
        };
        let run = |mode| {
            let mut r = run_benchmark(&RunConfig {
                mode: Some(mode),
                ..base.clone()
            })
            .unwrap()
            .without_timing();
            r.config.mode = None;
            r
        };
        let seq = run(ExecMode::Sequential);
        let conc = run(ExecMode::Concurrent);
        let again = run(ExecMode::Concurrent);
        if seq != conc || conc != again || !seq.validation.passed() {
            differ.push(format!("{} p={}", base.algorithm, seq.p));
        }
    }
    outcome(
        "determinism",
        differ.is_empty(),
        if differ.is_empty() {
            format!(
                "{} configurations identical across sequential, concurrent and repeated runs",
                configs.len()
            )
        } else {
            format!("reports differ for {}", differ.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut validated = Validated::default();
    let mut outcomes = vec![
        oracle_equivalence(&mut validated),
        spmsv_equivalence(),
        one_d_comm_oracle(&mut validated),
        two_d_expand_oracle(&mut validated),
        diagonal_imbalance(&mut validated),
    ];
    outcomes.extend(rmat_statistics());
    outcomes.push(cost_fidelity());
    outcomes.push(validation_suite(&validated));
    outcomes.push(determinism());

    let mut unexpected = 0;
    for o in &outcomes {
        let tag = match (o.pass, o.known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} {}: {}", o.name, o.detail);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "{passed}/{} criteria passed, {unexpected} unexpected failures, {:.1} s",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
