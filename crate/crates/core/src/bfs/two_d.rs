use serde::{Deserialize, Serialize};

use super::{check_source, distances_from_parents, BfsOutput, BfsRun, UNREACHED};
use crate::comm::{
    run_ranks, transpose_vector, ExecMode, ProcGrid, ReduceOp, SuperPhase, Superstep,
    TransposeMode, VectorDist2D, VectorLayout,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeList, VertexId};
use crate::sparse::{
    build_dcsc, partition_2d, split_rowwise, spmsv_heap, spmsv_spa_into, Backend, Dcsc, Kernel,
    Spa, SparseVector,
};

const OFFSET_BITS: u32 = 32;
const OFFSET_MASK: u64 = (1 << OFFSET_BITS) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bfs2dConfig {
    pub dist: VectorDist2D,
    /// Row stripes of each local block, multiplied independently.
    pub threads: usize,
    pub backend: Backend,
    pub transpose: TransposeMode,
    pub mode: ExecMode,
}

impl Bfs2dConfig {
    pub fn new(grid: ProcGrid) -> Self {
        Bfs2dConfig {
            dist: VectorDist2D::TwoD,
            threads: 1,
            backend: Backend::auto(grid.size()),
            transpose: TransposeMode::Auto,
            mode: ExecMode::from_env(),
        }
    }
}

/// Blocks of `g` for `grid`, in rank order, as DCSC.
pub fn prepare_2d(g: &EdgeList, grid: ProcGrid) -> Result<Vec<Dcsc>> {
    Ok(partition_2d(g, grid.p_r(), grid.p_c())?
        .iter()
        .map(build_dcsc)
        .collect())
}

struct RankResult {
    parents: Vec<u64>,
    levels: u64,
    merge_ops: Vec<u64>,
    local_out: Vec<u64>,
}

fn check_blocks(layout: &VectorLayout, blocks: &[Dcsc]) -> Result<()> {
    let grid = layout.grid();
    if blocks.len() != grid.size() {
        return Err(Error::Protocol(format!(
            "{} blocks for a {}x{} grid",
            blocks.len(),
            grid.p_r(),
            grid.p_c()
        )));
    }
    for (rank, d) in blocks.iter().enumerate() {
        let (i, j) = grid.coords(rank);
        let (rows, cols) = (layout.row_block(i), layout.col_block(j));
        if d.nrows() != rows.end - rows.start || d.ncols() != cols.end - cols.start {
            return Err(Error::Protocol(format!(
                "rank {rank} holds a {}x{} block; P({i},{j}) expects {}x{}",
                d.nrows(),
                d.ncols(),
                rows.end - rows.start,
                cols.end - cols.start
            )));
        }
        if d.row_offset() != 0 {
            return Err(Error::Contract(format!(
                "rank {rank} holds a row stripe, not a block"
            )));
        }
    }
    let widest = (0..grid.size())
        .map(|r| {
            let (a, b) = (layout.row_wise_range(r), layout.col_block(grid.coords(r).1));
            (a.end - a.start).max(b.end - b.start)
        })
        .max()
        .unwrap_or(0);
    if widest > OFFSET_MASK + 1 {
        return Err(Error::Unsupported(format!(
            "2D intervals of {widest} vertices exceed the packed 32-bit offset"
        )));
    }
    Ok(())
}

/// Linear-algebraic search on a `p_r x p_c` grid; `blocks[rank]` is the
/// block `A_ij` of `P(i, j)` from [`prepare_2d`] (the matrix is taken as
/// already transposed, so column `v` lists the neighbors of `v`).
///
/// Per level: transpose the frontier to column-wise ownership, allgather it
/// along the processor column, multiply locally over (select, max), send the
/// result pieces to their row-wise owners along the processor row, merge
/// with a SPA and keep the rows whose parent is still unset. Frontier values
/// are the vertex ids themselves, so only indices are expanded; each fold
/// record is one word holding the row offset inside the receiver's interval
/// and the parent offset inside the sender's column block.
pub fn bfs_2d(
    grid: ProcGrid,
    n: u64,
    blocks: &[Dcsc],
    s: VertexId,
    cfg: &Bfs2dConfig,
) -> Result<BfsRun> {
    if cfg.threads == 0 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    let layout = VectorLayout::new(n, grid, cfg.dist)?;
    check_blocks(&layout, blocks)?;
    check_source(s, n)?;
    let world = grid.world();
    let kernel = cfg.backend.kernel();

    let (results, stats) = run_ranks(grid, cfg.mode, |ctx| {
        let me = ctx.rank();
        let (i, j) = grid.coords(me);
        let row_group = grid.row_group(i);
        let col_group = grid.col_group(j);
        let row_block = layout.row_block(i);
        let col_start = layout.col_block(j).start;
        let owned = layout.row_wise_range(me);
        let stripes = split_rowwise(&blocks[me], cfg.threads)?;
        let mut stripe_spas: Vec<Spa> = match kernel {
            Kernel::Spa => stripes
                .iter()
                .map(|d| Spa::new(d.nrows() as usize))
                .collect(),
            Kernel::Heap => Vec::new(),
        };
        let mut merge_spa = Spa::new((owned.end - owned.start) as usize);
        let mut parents = vec![UNREACHED; (owned.end - owned.start) as usize];
        let mut frontier: Vec<u64> = Vec::new();
        if owned.contains(&s) {
            parents[(s - owned.start) as usize] = s;
            frontier.push(s);
        }
        let mut step = Superstep::new(0);
        let mut merge_ops = Vec::new();
        let mut local_out = Vec::new();
        loop {
            ctx.set_level(step.level());
            if ctx.allreduce(&world, ReduceOp::Or, !frontier.is_empty() as u64)? == 0 {
                break;
            }

            step.enter(SuperPhase::Expand)?;
            let mine = transpose_vector(ctx, &layout, cfg.transpose, &frontier)?;
            let f_j = ctx.allgatherv(&col_group, mine)?;

            step.enter(SuperPhase::Local)?;
            let f = SparseVector::new(f_j.iter().map(|&v| v - col_start).collect(), f_j)?;
            let mut t = SparseVector::empty();
            for (k, stripe) in stripes.iter().enumerate() {
                let piece = match kernel {
                    Kernel::Spa => spmsv_spa_into(stripe, &f, &mut stripe_spas[k])?,
                    Kernel::Heap => spmsv_heap(stripe, &f)?,
                };
                t.extend_sorted(piece)?;
            }
            local_out.push(t.len() as u64);

            step.enter(SuperPhase::Fold)?;
            let mut send = vec![Vec::new(); grid.p_c()];
            for (row, parent) in t.iter() {
                let v = row_block.start + row;
                let owner = layout.row_wise_owner(v);
                let dest_start = layout.row_wise_range(owner).start;
                send[grid.coords(owner).1]
                    .push((v - dest_start) << OFFSET_BITS | (parent - col_start));
            }
            let recv = ctx.alltoallv(&row_group, send)?;
            let mut merged = 0u64;
            for (k, buf) in recv.iter().enumerate() {
                let sender_cols = layout.col_block(k).start;
                merged += buf.len() as u64;
                for &w in buf {
                    merge_spa
                        .accumulate((w >> OFFSET_BITS) as usize, sender_cols + (w & OFFSET_MASK));
                }
            }
            merge_ops.push(merged);

            step.enter(SuperPhase::Update)?;
            let candidates = merge_spa.drain_sorted(0);
            frontier.clear();
            for (off, parent) in candidates.iter() {
                let slot = &mut parents[off as usize];
                if *slot == UNREACHED {
                    *slot = parent;
                    frontier.push(owned.start + off);
                }
            }
            step.next_level();
        }
        Ok(RankResult {
            parents,
            levels: step.level(),
            merge_ops,
            local_out,
        })
    })?;

    let levels = results[0].levels;
    if results.iter().any(|r| r.levels != levels) {
        return Err(Error::Integrity("ranks disagree on the level count".into()));
    }
    let mut parents = Vec::with_capacity(n as usize);
    let mut merge_ops = Vec::with_capacity(grid.size());
    let mut local_out = Vec::with_capacity(grid.size());
    // Row-wise intervals ascend with the rank, so concatenation is in
    // vertex order.
    for r in results {
        parents.extend(r.parents);
        merge_ops.push(r.merge_ops);
        local_out.push(r.local_out);
    }
    let distances = distances_from_parents(&parents, s)?;
    let reached = distances.iter().filter(|&&d| d != UNREACHED).count() as u64;
    let mut stored = 0u64;
    for (rank, d) in blocks.iter().enumerate() {
        let rows = layout.row_block(grid.coords(rank).0);
        stored += d
            .ir()
            .iter()
            .filter(|&&r| distances[(rows.start + r) as usize] != UNREACHED)
            .count() as u64;
    }
    Ok(BfsRun {
        output: BfsOutput {
            source: s,
            levels,
            reached,
            edges_traversed: stored / 2,
            distances,
            parents,
        },
        stats,
        merge_ops,
        local_out,
    })
}

/// Fold-phase merge work per rank, summed over levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeImbalance {
    pub per_rank: Vec<u64>,
    pub total: u64,
    /// Fraction of all merges done by diagonal ranks `P(i, i)`.
    pub diagonal_share: f64,
    /// Busiest rank over the mean; 1 is perfect balance.
    pub max_over_mean: f64,
}

pub fn measure_merge_imbalance(grid: ProcGrid, run: &BfsRun) -> Result<MergeImbalance> {
    if run.merge_ops.len() != grid.size() {
        return Err(Error::Contract(format!(
            "run has {} ranks, grid has {}",
            run.merge_ops.len(),
            grid.size()
        )));
    }
    let per_rank: Vec<u64> = run.merge_ops.iter().map(|l| l.iter().sum()).collect();
    let total: u64 = per_rank.iter().sum();
    let diagonal: u64 = per_rank
        .iter()
        .enumerate()
        .filter(|&(r, _)| {
            let (i, j) = grid.coords(r);
            i == j
        })
        .map(|(_, &c)| c)
        .sum();
    let (diagonal_share, max_over_mean) = if total == 0 {
        (0.0, 1.0)
    } else {
        let mean = total as f64 / per_rank.len() as f64;
        (
            diagonal as f64 / total as f64,
            *per_rank.iter().max().unwrap() as f64 / mean,
        )
    };
    Ok(MergeImbalance {
        per_rank,
        total,
        diagonal_share,
        max_over_mean,
    })
}
