use std::collections::HashSet;

use super::{check_source, BfsOutput, BfsRun, UNREACHED};
use crate::comm::{run_ranks, ExecMode, ProcGrid, ReduceOp};
use crate::error::{Error, Result};
use crate::graph::{BlockPartition, CsrGraph, VertexId};

const OFFSET_BITS: u32 = 32;
const OFFSET_MASK: u64 = (1 << OFFSET_BITS) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bfs1dConfig {
    /// Simulated threads per rank; each scans a contiguous slice of the
    /// frontier into its own per-destination buckets.
    pub threads: usize,
    /// Drop repeated targets per destination rank within a level before the
    /// exchange. Off by default: every frontier adjacency is sent once.
    pub dedup_sends: bool,
    pub mode: ExecMode,
}

impl Default for Bfs1dConfig {
    fn default() -> Self {
        Bfs1dConfig {
            threads: 1,
            dedup_sends: false,
            mode: ExecMode::from_env(),
        }
    }
}

struct RankResult {
    distances: Vec<u64>,
    parents: Vec<u64>,
    levels: u64,
    degree_sum: u64,
    merge_ops: Vec<u64>,
    local_out: Vec<u64>,
}

fn check_parts(parts: &[CsrGraph]) -> Result<BlockPartition> {
    let p = parts.len();
    if p == 0 {
        return Err(Error::Config("1D search over zero ranks".into()));
    }
    let n = parts[0].n_global;
    let part = BlockPartition::new(n, p)?;
    for (rank, g) in parts.iter().enumerate() {
        if g.n_global != n || g.owned_range() != part.range(rank) {
            return Err(Error::Protocol(format!(
                "rank {rank} holds vertices {:?} of an {}-vertex graph; expected {:?} of {n}",
                g.owned_range(),
                g.n_global,
                part.range(rank)
            )));
        }
    }
    if part.block_len() > OFFSET_MASK + 1 {
        return Err(Error::Unsupported(format!(
            "1D blocks of {} vertices exceed the packed 32-bit offset",
            part.block_len()
        )));
    }
    Ok(part)
}

/// Vertex-partitioned level-synchronous search over `parts.len()` ranks,
/// where rank `r` holds `parts[r]` as built by `build_csr_1d`.
///
/// Each exchanged record is one word: the target's offset inside its owner's
/// block (high half) and the parent's offset inside the sender's block (low
/// half). Receivers scan buffers in source-rank order and keep the first
/// parent offered for a vertex.
pub fn bfs_1d(parts: &[CsrGraph], s: VertexId, cfg: &Bfs1dConfig) -> Result<BfsRun> {
    if cfg.threads == 0 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    let part = check_parts(parts)?;
    let n = part.n();
    check_source(s, n)?;
    let p = parts.len();
    let grid = ProcGrid::linear(p);
    let world = grid.world();

    let (results, stats) = run_ranks(grid, cfg.mode, |ctx| {
        let me = ctx.rank();
        let g = &parts[me];
        let owned = g.owned_range();
        let mut distances = vec![UNREACHED; g.n_local];
        let mut parents = vec![UNREACHED; g.n_local];
        let mut fs: Vec<VertexId> = Vec::new();
        if owned.contains(&s) {
            distances[(s - owned.start) as usize] = 0;
            parents[(s - owned.start) as usize] = s;
            fs.push(s);
        }
        let mut level = 0u64;
        let mut degree_sum = 0u64;
        let mut merge_ops = Vec::new();
        let mut local_out = Vec::new();
        loop {
            ctx.set_level(level);
            if ctx.allreduce(&world, ReduceOp::Or, !fs.is_empty() as u64)? == 0 {
                break;
            }

            let chunk = fs.len().div_ceil(cfg.threads).max(1);
            let mut send: Vec<Vec<u64>> = vec![Vec::new(); p];
            let mut produced = 0u64;
            for slice in fs.chunks(chunk) {
                let mut tbuf: Vec<Vec<u64>> = vec![Vec::new(); p];
                for &u in slice {
                    let adj = g.neighbors(u);
                    degree_sum += adj.len() as u64;
                    for &v in adj {
                        let dest = part.owner(v);
                        let target = v - part.range(dest).start;
                        tbuf[dest].push(target << OFFSET_BITS | (u - owned.start));
                    }
                }
                for (dest, bucket) in tbuf.into_iter().enumerate() {
                    produced += bucket.len() as u64;
                    send[dest].extend(bucket);
                }
            }
            if cfg.dedup_sends {
                for buf in &mut send {
                    let mut seen = HashSet::with_capacity(buf.len());
                    buf.retain(|&w| seen.insert(w >> OFFSET_BITS));
                }
            }
            local_out.push(produced);

            let recv = ctx.alltoallv(&world, send)?;
            let mut ns = Vec::new();
            let mut merged = 0u64;
            for (src, buf) in recv.iter().enumerate() {
                let src_start = part.range(src).start;
                merged += buf.len() as u64;
                for &w in buf {
                    let v = (w >> OFFSET_BITS) as usize;
                    if distances[v] == UNREACHED {
                        distances[v] = level + 1;
                        parents[v] = src_start + (w & OFFSET_MASK);
                        ns.push(owned.start + v as u64);
                    }
                }
            }
            merge_ops.push(merged);
            fs = ns;
            level += 1;
        }
        Ok(RankResult {
            distances,
            parents,
            levels: level,
            degree_sum,
            merge_ops,
            local_out,
        })
    })?;

    let levels = results[0].levels;
    if results.iter().any(|r| r.levels != levels) {
        return Err(Error::Integrity("ranks disagree on the level count".into()));
    }
    let degree_sum: u64 = results.iter().map(|r| r.degree_sum).sum();
    let mut distances = Vec::with_capacity(n as usize);
    let mut parents = Vec::with_capacity(n as usize);
    let mut merge_ops = Vec::with_capacity(p);
    let mut local_out = Vec::with_capacity(p);
    for r in results {
        distances.extend(r.distances);
        parents.extend(r.parents);
        merge_ops.push(r.merge_ops);
        local_out.push(r.local_out);
    }
    let reached = distances.iter().filter(|&&d| d != UNREACHED).count() as u64;
    Ok(BfsRun {
        output: BfsOutput {
            source: s,
            levels,
            reached,
            edges_traversed: degree_sum / 2,
            distances,
            parents,
        },
        stats,
        merge_ops,
        local_out,
    })
}
