use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{BlockPartition, EdgeList};

/// The submatrix `A_ij` held by processor `P(i, j)`, in block-local
/// coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block2D {
    pub row_block: usize,
    pub col_block: usize,
    pub row_range: Range<u64>,
    pub col_range: Range<u64>,
    /// Sorted, duplicate-free `(local row, local col)` pairs.
    pub edges: Vec<(u64, u64)>,
}

impl Block2D {
    pub fn nrows(&self) -> u64 {
        self.row_range.end - self.row_range.start
    }

    pub fn ncols(&self) -> u64 {
        self.col_range.end - self.col_range.start
    }

    pub fn global_entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.edges
            .iter()
            .map(|&(r, c)| (r + self.row_range.start, c + self.col_range.start))
    }
}

/// Splits the adjacency matrix into a `p_r x p_c` grid of blocks (row-major,
/// block `(i, j)` at index `i * p_c + j`). Edge `(u, v)` becomes entry
/// `(row u, col v)`; the input is taken as already transposed. Self-loops and
/// duplicate entries are dropped.
pub fn partition_2d(g: &EdgeList, p_r: usize, p_c: usize) -> Result<Vec<Block2D>> {
    if p_r == 0 || p_c == 0 || p_r as u64 > g.n || p_c as u64 > g.n {
        return Err(Error::Config(format!(
            "cannot split a {0}x{0} matrix over a {p_r}x{p_c} grid",
            g.n
        )));
    }
    g.check_bounds()?;
    let rows = BlockPartition::new(g.n, p_r)?;
    let cols = BlockPartition::new(g.n, p_c)?;
    let mut blocks: Vec<Block2D> = (0..p_r * p_c)
        .map(|b| {
            let (i, j) = (b / p_c, b % p_c);
            Block2D {
                row_block: i,
                col_block: j,
                row_range: rows.range(i),
                col_range: cols.range(j),
                edges: Vec::new(),
            }
        })
        .collect();
    for &(u, v) in &g.edges {
        if u == v {
            continue;
        }
        let (i, j) = (rows.owner(u), cols.owner(v));
        let block = &mut blocks[i * p_c + j];
        block
            .edges
            .push((u - block.row_range.start, v - block.col_range.start));
    }
    for block in &mut blocks {
        block.edges.sort_unstable();
        block.edges.dedup();
    }
    Ok(blocks)
}
