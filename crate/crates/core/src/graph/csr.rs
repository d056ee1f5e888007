use std::ops::Range;

use super::{BlockPartition, EdgeList, VertexId};
use crate::error::{Error, Result};

/// Adjacency of the vertices one rank owns under 1D partitioning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    /// Vertex count of the whole graph.
    pub n_global: u64,
    /// First global vertex id owned by this rank.
    pub global_offset: u64,
    pub n_local: usize,
    /// `offsets[i]..offsets[i + 1]` delimits the neighbors of local vertex `i`.
    pub offsets: Vec<usize>,
    /// Sorted, duplicate-free global neighbor ids.
    pub adjacency: Vec<VertexId>,
}

impl CsrGraph {
    fn from_sorted_pairs(n_global: u64, owned: Range<u64>, pairs: &[(VertexId, VertexId)]) -> Self {
        let n_local = (owned.end - owned.start) as usize;
        let mut offsets = vec![0usize; n_local + 1];
        for &(u, _) in pairs {
            offsets[(u - owned.start) as usize + 1] += 1;
        }
        for i in 0..n_local {
            offsets[i + 1] += offsets[i];
        }
        CsrGraph {
            n_global,
            global_offset: owned.start,
            n_local,
            offsets,
            adjacency: pairs.iter().map(|&(_, v)| v).collect(),
        }
    }

    pub fn owned_range(&self) -> Range<u64> {
        self.global_offset..self.global_offset + self.n_local as u64
    }

    pub fn owns(&self, v: VertexId) -> bool {
        self.owned_range().contains(&v)
    }

    /// Neighbors of a global vertex this rank owns.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let i = (v - self.global_offset) as usize;
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.owns(u) && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.adjacency.len()
    }

    /// True when this graph holds every vertex (the `p = 1` layout).
    pub fn is_whole(&self) -> bool {
        self.global_offset == 0 && self.n_local as u64 == self.n_global
    }

    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.offsets.len() == self.n_local + 1
            && self.offsets[0] == 0
            && self.offsets[self.n_local] == self.adjacency.len()
            && self.offsets.windows(2).all(|w| w[0] <= w[1])
            && (0..self.n_local).all(|i| {
                self.adjacency[self.offsets[i]..self.offsets[i + 1]]
                    .windows(2)
                    .all(|w| w[0] < w[1])
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Integrity(
                "CSR offsets or adjacency order broken".into(),
            ))
        }
    }
}

fn owned_pairs(g: &EdgeList, owned: &Range<u64>) -> Vec<(VertexId, VertexId)> {
    let mut pairs: Vec<_> = g
        .edges
        .iter()
        .copied()
        .filter(|&(u, v)| u != v && owned.contains(&u))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn check_partition(g: &EdgeList, p: usize) -> Result<BlockPartition> {
    if p == 0 || p as u64 > g.n {
        return Err(Error::Config(format!(
            "cannot split {} vertices over {p} ranks",
            g.n
        )));
    }
    g.check_bounds()?;
    BlockPartition::new(g.n, p)
}

/// CSR of the vertices `rank` owns when `g` is split over `p` ranks in blocks
/// of `ceil(n / p)`. Self-loops and duplicate edges are dropped.
pub fn build_csr_1d(g: &EdgeList, rank: usize, p: usize) -> Result<CsrGraph> {
    let blocks = check_partition(g, p)?;
    if rank >= p {
        return Err(Error::Config(format!("rank {rank} outside [0, {p})")));
    }
    let owned = blocks.range(rank);
    let pairs = owned_pairs(g, &owned);
    Ok(CsrGraph::from_sorted_pairs(g.n, owned, &pairs))
}

/// All `p` per-rank graphs in one pass over the edge list.
pub fn build_csr_partition(g: &EdgeList, p: usize) -> Result<Vec<CsrGraph>> {
    let blocks = check_partition(g, p)?;
    let mut buckets: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); p];
    for &(u, v) in &g.edges {
        if u != v {
            buckets[blocks.owner(u)].push((u, v));
        }
    }
    Ok(buckets
        .into_iter()
        .enumerate()
        .map(|(rank, mut pairs)| {
            pairs.sort_unstable();
            pairs.dedup();
            CsrGraph::from_sorted_pairs(g.n, blocks.range(rank), &pairs)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{rmat_generate, shuffle_vertices, symmetrize, RmatParams};

    fn path3() -> EdgeList {
        symmetrize(&EdgeList::new(3, vec![(0, 1), (1, 2)], true).unwrap())
    }

    #[test]
    fn path_serial_layout() {
        let csr = build_csr_1d(&path3(), 0, 1).unwrap();
        assert_eq!(csr.offsets, vec![0, 1, 3, 4]);
        assert_eq!(csr.adjacency, vec![1, 0, 2, 1]);
        csr.check_invariants().unwrap();
    }

    #[test]
    fn path_middle_rank() {
        let csr = build_csr_1d(&path3(), 1, 3).unwrap();
        assert_eq!(csr.n_local, 1);
        assert_eq!(csr.global_offset, 1);
        assert_eq!(csr.adjacency, vec![0, 2]);
    }

    #[test]
    fn too_many_ranks() {
        assert!(matches!(
            build_csr_1d(&path3(), 0, 4),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_csr_1d(&path3(), 3, 3),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn drops_loops_and_duplicates() {
        let g = EdgeList::new(2, vec![(0, 1), (0, 1), (0, 0), (1, 0)], true).unwrap();
        let csr = build_csr_1d(&g, 0, 1).unwrap();
        assert_eq!(csr.adjacency, vec![1, 0]);
    }

    #[test]
    fn partitioned_union_equals_serial() {
        let g = symmetrize(&rmat_generate(&RmatParams::graph500(10, 16), 5).unwrap());
        let (g, _) = shuffle_vertices(&g, 6);
        let serial = build_csr_1d(&g, 0, 1).unwrap();
        let parts = build_csr_partition(&g, 4).unwrap();
        let mut adjacency = Vec::new();
        let mut next = 0;
        for (rank, part) in parts.iter().enumerate() {
            assert_eq!(part, &build_csr_1d(&g, rank, 4).unwrap());
            assert_eq!(part.global_offset, next);
            next += part.n_local as u64;
            part.check_invariants().unwrap();
            adjacency.extend_from_slice(&part.adjacency);
        }
        assert_eq!(next, g.n);
        assert_eq!(adjacency, serial.adjacency);
    }
}
