//! Serial, 1D and 2D breadth-first search plus tree validation.

mod one_d;
mod two_d;
mod validate;

pub use crate::comm::VectorDist2D;
pub use one_d::{bfs_1d, Bfs1dConfig};
pub use two_d::{bfs_2d, measure_merge_imbalance, prepare_2d, Bfs2dConfig, MergeImbalance};
pub use validate::{validate_bfs_tree, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::comm::CommStats;
use crate::error::{Error, Result};
use crate::graph::{BlockPartition, CsrGraph, VertexId};

/// Distance and parent value of a vertex the search never reached.
pub const UNREACHED: u64 = u64::MAX;

/// Result of one search. `distances` and `parents` use [`UNREACHED`] for
/// unreached vertices; the source is its own parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsOutput {
    pub source: VertexId,
    /// Iterations with a nonempty frontier (eccentricity of the source + 1).
    pub levels: u64,
    pub reached: u64,
    /// Undirected edges with both endpoints reached. The benchmark replaces
    /// this with the count over the original directed edge list.
    pub edges_traversed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distances: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsSummary {
    pub source: VertexId,
    pub levels: u64,
    pub reached: u64,
    pub edges_traversed: u64,
}

impl BfsOutput {
    pub fn summary(&self) -> BfsSummary {
        BfsSummary {
            source: self.source,
            levels: self.levels,
            reached: self.reached,
            edges_traversed: self.edges_traversed,
        }
    }

    /// Copy without the per-vertex arrays.
    pub fn without_vectors(&self) -> BfsOutput {
        BfsOutput {
            distances: Vec::new(),
            parents: Vec::new(),
            ..self.clone()
        }
    }
}

/// A distributed search together with its instrumentation.
#[derive(Debug, Clone)]
pub struct BfsRun {
    pub output: BfsOutput,
    pub stats: CommStats,
    /// `merge_ops[rank][level]`: received entries the rank merged.
    pub merge_ops: Vec<Vec<u64>>,
    /// `local_out[rank][level]`: entries the rank's local step produced
    /// (adjacencies bucketed in 1D, SpMSV output size in 2D).
    pub local_out: Vec<Vec<u64>>,
}

/// Rank owning `v` under block distribution of `n` vertices over `p` ranks.
pub fn find_owner(v: VertexId, n: u64, p: usize) -> Result<usize> {
    if v >= n {
        return Err(Error::Contract(format!("vertex {v} outside [0, {n})")));
    }
    Ok(BlockPartition::new(n, p)?.owner(v))
}

fn check_source(s: VertexId, n: u64) -> Result<()> {
    if s >= n {
        return Err(Error::Contract(format!("source {s} outside [0, {n})")));
    }
    Ok(())
}

/// Level-synchronous search with a current and a next frontier stack.
pub fn bfs_serial(g: &CsrGraph, s: VertexId) -> Result<BfsOutput> {
    if !g.is_whole() {
        return Err(Error::Contract(
            "serial search needs the whole graph on one rank".into(),
        ));
    }
    let n = g.n_global;
    check_source(s, n)?;
    let mut distances = vec![UNREACHED; n as usize];
    let mut parents = vec![UNREACHED; n as usize];
    distances[s as usize] = 0;
    parents[s as usize] = s;
    let mut fs = vec![s];
    let mut ns = Vec::new();
    let mut level = 0u64;
    let mut degree_sum = 0u64;
    while !fs.is_empty() {
        level += 1;
        for &u in &fs {
            let adj = g.neighbors(u);
            degree_sum += adj.len() as u64;
            for &v in adj {
                if distances[v as usize] == UNREACHED {
                    distances[v as usize] = level;
                    parents[v as usize] = u;
                    ns.push(v);
                }
            }
        }
        std::mem::swap(&mut fs, &mut ns);
        ns.clear();
    }
    let reached = distances.iter().filter(|&&d| d != UNREACHED).count() as u64;
    Ok(BfsOutput {
        source: s,
        levels: level,
        reached,
        edges_traversed: degree_sum / 2,
        distances,
        parents,
    })
}

/// Hop counts obtained by following parent pointers back to `s`.
pub fn distances_from_parents(parents: &[u64], s: VertexId) -> Result<Vec<u64>> {
    let n = parents.len();
    if s as usize >= n {
        return Err(Error::Contract(format!("source {s} outside [0, {n})")));
    }
    if parents[s as usize] != s {
        return Err(Error::Integrity(format!(
            "source {s} has parent {} instead of itself",
            parents[s as usize]
        )));
    }
    let mut dist = vec![UNREACHED; n];
    dist[s as usize] = 0;
    let mut path = Vec::new();
    for start in 0..n {
        if parents[start] == UNREACHED || dist[start] != UNREACHED {
            continue;
        }
        // Walk up until a vertex with a known distance, then unwind.
        let mut v = start;
        while dist[v] == UNREACHED {
            let p = parents[v];
            if p == UNREACHED || p as usize >= n {
                return Err(Error::Integrity(format!(
                    "vertex {v} has dangling parent {p}"
                )));
            }
            path.push(v);
            if path.len() > n {
                return Err(Error::Integrity(format!(
                    "parent cycle through vertex {start}"
                )));
            }
            v = p as usize;
        }
        let mut d = dist[v];
        while let Some(u) = path.pop() {
            d += 1;
            dist[u] = d;
        }
    }
    Ok(dist)
}
