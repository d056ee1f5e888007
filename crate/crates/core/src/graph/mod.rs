//! Graph generation, ingestion, relabeling and the 1D CSR layout.

mod csr;
mod io;
mod rmat;

pub use csr::{build_csr_1d, build_csr_partition, CsrGraph};
pub use io::{load_edge_list, write_edge_list, EdgeListFormat, BINARY_MAGIC, BINARY_VERSION};
pub use rmat::{rmat_generate, RmatParams};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type VertexId = u64;

/// Vertex ids at or above this bound are rejected on ingestion and generation.
pub const MAX_VERTEX_BITS: u32 = 48;

/// Raw edge list as produced by a generator or loaded from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub n: u64,
    pub edges: Vec<(VertexId, VertexId)>,
    pub directed: bool,
    /// Number of directed input edges this list was derived from. Set by
    /// [`symmetrize`]; TEPS counts only these.
    pub original_edge_count: Option<u64>,
}

impl EdgeList {
    pub fn new(n: u64, edges: Vec<(VertexId, VertexId)>, directed: bool) -> Result<Self> {
        let g = EdgeList {
            n,
            edges,
            directed,
            original_edge_count: None,
        };
        g.check_bounds()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn check_bounds(&self) -> Result<()> {
        if let Some(&(u, v)) = self
            .edges
            .iter()
            .find(|&&(u, v)| u >= self.n || v >= self.n)
        {
            return Err(Error::Contract(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Out-degree of every vertex (self-loops and duplicates included).
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n as usize];
        for &(u, _) in &self.edges {
            deg[u as usize] += 1;
        }
        deg
    }
}

/// Contiguous block ownership of `[0, n)` over `parts` owners, with blocks of
/// `ceil(n / parts)` elements. The last non-empty block takes the remainder;
/// trailing owners may own nothing when `parts` does not divide `n` evenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    n: u64,
    parts: usize,
    block: u64,
}

impl BlockPartition {
    pub fn new(n: u64, parts: usize) -> Result<Self> {
        if parts == 0 {
            return Err(Error::Config("partition into zero parts".into()));
        }
        Ok(BlockPartition {
            n,
            parts,
            block: n.div_ceil(parts as u64),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn block_len(&self) -> u64 {
        self.block
    }

    pub fn range(&self, part: usize) -> std::ops::Range<u64> {
        let lo = (part as u64).saturating_mul(self.block).min(self.n);
        let hi = lo.saturating_add(self.block).min(self.n);
        lo..hi
    }

    /// Owner of `v`; callers guarantee `v < n`.
    pub fn owner(&self, v: u64) -> usize {
        debug_assert!(v < self.n);
        (v / self.block) as usize
    }
}

/// A bijection on `[0, n)` used to relabel vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub forward: Vec<VertexId>,
    pub inverse: Vec<VertexId>,
}

impl Permutation {
    pub fn identity(n: u64) -> Self {
        let forward: Vec<u64> = (0..n).collect();
        Permutation {
            inverse: forward.clone(),
            forward,
        }
    }

    /// Uniform random permutation drawn with a seeded Fisher-Yates shuffle
    /// (ChaCha8 stream).
    pub fn random(n: u64, seed: u64) -> Self {
        let mut forward: Vec<u64> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        forward.shuffle(&mut rng);
        let mut inverse = vec![0u64; forward.len()];
        for (orig, &new) in forward.iter().enumerate() {
            inverse[new as usize] = orig as u64;
        }
        Permutation { forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.forward[v as usize]
    }

    pub fn invert(&self, v: VertexId) -> VertexId {
        self.inverse[v as usize]
    }

    pub fn is_bijection(&self) -> bool {
        self.forward.len() == self.inverse.len()
            && self.forward.iter().enumerate().all(|(i, &f)| {
                (f as usize) < self.inverse.len() && self.inverse[f as usize] == i as u64
            })
    }
}

/// Adds the reverse of every edge and removes duplicate pairs. Self-loops are
/// kept (once); they are dropped when traversal structures are built.
pub fn symmetrize(g: &EdgeList) -> EdgeList {
    let mut edges = Vec::with_capacity(g.edges.len() * 2);
    for &(u, v) in &g.edges {
        edges.push((u, v));
        edges.push((v, u));
    }
    edges.sort_unstable();
    edges.dedup();
    let original_edge_count = if g.directed {
        Some(g.edges.len() as u64)
    } else {
        g.original_edge_count
    };
    EdgeList {
        n: g.n,
        edges,
        directed: false,
        original_edge_count,
    }
}

/// Relabels every vertex through a seeded random permutation.
pub fn shuffle_vertices(g: &EdgeList, seed: u64) -> (EdgeList, Permutation) {
    let perm = Permutation::random(g.n, seed);
    let edges = g
        .edges
        .iter()
        .map(|&(u, v)| (perm.apply(u), perm.apply(v)))
        .collect();
    (
        EdgeList {
            n: g.n,
            edges,
            directed: g.directed,
            original_edge_count: g.original_edge_count,
        },
        perm,
    )
}
