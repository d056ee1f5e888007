use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{CommPhase, Group, ProcGrid, RankCtx};
use crate::error::{Error, Result};
use crate::graph::BlockPartition;

/// How vectors (frontier, parents) are spread over a 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorDist2D {
    /// Every rank owns a piece, aligned with the matrix blocks.
    #[default]
    TwoD,
    /// Only `P(i, i)` owns anything: all of row block `i`.
    Diagonal,
}

/// Vector ownership intervals for one `(n, grid, distribution)`.
///
/// Row-wise ownership (used for parents and for the fold result) splits row
/// block `R_i` of the matrix among the `p_c` ranks of processor row `i`.
/// Column-wise ownership (used for the expand) splits column block `C_j`
/// among the `p_r` ranks of processor column `j`. Within a block each of the
/// `k` ranks gets `floor(len / k)` elements and the last one the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorLayout {
    grid: ProcGrid,
    dist: VectorDist2D,
    rows: BlockPartition,
    cols: BlockPartition,
}

fn split(block: Range<u64>, parts: usize, k: usize) -> Range<u64> {
    let base = (block.end - block.start) / parts as u64;
    let lo = block.start + k as u64 * base;
    let hi = if k + 1 == parts { block.end } else { lo + base };
    lo..hi
}

fn split_owner(block: Range<u64>, parts: usize, v: u64) -> usize {
    match (block.end - block.start).checked_div(parts as u64) {
        Some(base) if base > 0 => (((v - block.start) / base) as usize).min(parts - 1),
        _ => parts - 1,
    }
}

impl VectorLayout {
    pub fn new(n: u64, grid: ProcGrid, dist: VectorDist2D) -> Result<Self> {
        if dist == VectorDist2D::Diagonal && !grid.is_square() {
            return Err(Error::Unsupported(format!(
                "diagonal vector distribution needs a square grid, got {}x{}",
                grid.p_r(),
                grid.p_c()
            )));
        }
        Ok(VectorLayout {
            grid,
            dist,
            rows: BlockPartition::new(n, grid.p_r())?,
            cols: BlockPartition::new(n, grid.p_c())?,
        })
    }

    pub fn grid(&self) -> ProcGrid {
        self.grid
    }

    pub fn dist(&self) -> VectorDist2D {
        self.dist
    }

    pub fn n(&self) -> u64 {
        self.rows.n()
    }

    /// Matrix row block `R_i`.
    pub fn row_block(&self, i: usize) -> Range<u64> {
        self.rows.range(i)
    }

    /// Matrix column block `C_j`.
    pub fn col_block(&self, j: usize) -> Range<u64> {
        self.cols.range(j)
    }

    pub fn row_wise_range(&self, rank: usize) -> Range<u64> {
        let (i, j) = self.grid.coords(rank);
        let block = self.rows.range(i);
        match self.dist {
            VectorDist2D::TwoD => split(block, self.grid.p_c(), j),
            VectorDist2D::Diagonal if i == j => block,
            VectorDist2D::Diagonal => block.start..block.start,
        }
    }

    pub fn row_wise_owner(&self, v: u64) -> usize {
        let i = self.rows.owner(v);
        match self.dist {
            VectorDist2D::TwoD => {
                let j = split_owner(self.rows.range(i), self.grid.p_c(), v);
                self.grid.rank_of(i, j)
            }
            VectorDist2D::Diagonal => self.grid.rank_of(i, i),
        }
    }

    pub fn col_wise_range(&self, rank: usize) -> Range<u64> {
        let (i, j) = self.grid.coords(rank);
        let block = self.cols.range(j);
        match self.dist {
            VectorDist2D::TwoD => split(block, self.grid.p_r(), i),
            VectorDist2D::Diagonal if i == j => block,
            VectorDist2D::Diagonal => block.start..block.start,
        }
    }

    pub fn col_wise_owner(&self, v: u64) -> usize {
        let j = self.cols.owner(v);
        match self.dist {
            VectorDist2D::TwoD => {
                let i = split_owner(self.cols.range(j), self.grid.p_r(), v);
                self.grid.rank_of(i, j)
            }
            VectorDist2D::Diagonal => self.grid.rank_of(j, j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransposeMode {
    /// Pairwise on square grids, general otherwise.
    #[default]
    Auto,
    /// `P(i, j)` swaps with `P(j, i)`; square grids only.
    Pairwise,
    /// Alltoallv over the whole grid, each rank sending only to the ranks
    /// whose column-wise interval overlaps its row-wise interval.
    General,
}

/// Re-owns a rank's row-wise frontier piece under column-wise ownership.
///
/// Only indices travel: frontier values equal their own vertex ids. Returns
/// the indices this rank owns column-wise, sorted. Every rank of the grid
/// must call this collectively.
pub fn transpose_vector(
    ctx: &RankCtx<'_>,
    layout: &VectorLayout,
    mode: TransposeMode,
    indices: &[u64],
) -> Result<Vec<u64>> {
    let grid = layout.grid();
    let me = ctx.rank();
    let pairwise = match mode {
        TransposeMode::Auto => grid.is_square(),
        TransposeMode::Pairwise => {
            if !grid.is_square() {
                return Err(Error::Unsupported(format!(
                    "pairwise transpose on a {}x{} grid",
                    grid.p_r(),
                    grid.p_c()
                )));
            }
            true
        }
        TransposeMode::General => false,
    };
    let owned = layout.row_wise_range(me);
    if let Some(&v) = indices.iter().find(|v| !owned.contains(v)) {
        return Err(Error::Contract(format!(
            "rank {me} transposing index {v} it does not own ({owned:?})"
        )));
    }

    let mut out = if pairwise {
        let (i, j) = grid.coords(me);
        let partner = grid.rank_of(j, i);
        if let Some(&v) = indices
            .iter()
            .find(|&&v| layout.col_wise_owner(v) != partner)
        {
            return Err(Error::Integrity(format!(
                "index {v} of P({i},{j}) is not owned column-wise by P({j},{i})"
            )));
        }
        if partner == me {
            indices.to_vec()
        } else {
            let group = Group::new([me, partner])?;
            let mut send = vec![Vec::new(), Vec::new()];
            send[group.position(partner).unwrap()] = indices.to_vec();
            ctx.alltoallv_as(&group, CommPhase::Transpose, send)?
                .into_iter()
                .flatten()
                .collect()
        }
    } else {
        let mut send = vec![Vec::new(); grid.size()];
        for &v in indices {
            send[layout.col_wise_owner(v)].push(v);
        }
        ctx.alltoallv_as(&grid.world(), CommPhase::Transpose, send)?
            .into_iter()
            .flatten()
            .collect::<Vec<u64>>()
    };
    out.sort_unstable();
    Ok(out)
}
