use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{Dcsc, Spa, SparseVector};
use crate::error::{Error, Result};

/// Rank count at which `Auto` switches from the SPA to the heap kernel.
pub const DEFAULT_HEAP_MIN_RANKS: usize = 10_000;

/// Local merge kernel actually executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Spa,
    Heap,
}

/// Kernel selection. `Auto` picks the heap once the simulated machine has at
/// least `heap_min_ranks` ranks; below that the SPA is faster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Spa,
    Heap,
    Auto { ranks: usize, heap_min_ranks: usize },
}

impl Backend {
    pub fn auto(ranks: usize) -> Self {
        Backend::Auto {
            ranks,
            heap_min_ranks: DEFAULT_HEAP_MIN_RANKS,
        }
    }

    pub fn kernel(&self) -> Kernel {
        match *self {
            Backend::Spa => Kernel::Spa,
            Backend::Heap => Kernel::Heap,
            Backend::Auto {
                ranks,
                heap_min_ranks,
            } => {
                if ranks >= heap_min_ranks {
                    Kernel::Heap
                } else {
                    Kernel::Spa
                }
            }
        }
    }
}

fn check_frontier(d: &Dcsc, f: &SparseVector) -> Result<()> {
    // SparseVector construction already guarantees strict ordering.
    if let Some(&last) = f.indices().last() {
        if last >= d.ncols() {
            return Err(Error::Contract(format!(
                "frontier index {last} outside the block's {} columns",
                d.ncols()
            )));
        }
    }
    Ok(())
}

/// `t = A (x) f` over (select, max): every row adjacent to a frontier column
/// receives that column's frontier value, ties resolved by the maximum.
/// Output indices are block-local rows (including the matrix's row offset).
pub fn spmsv(d: &Dcsc, f: &SparseVector, backend: Backend) -> Result<SparseVector> {
    match backend.kernel() {
        Kernel::Spa => {
            let mut spa = Spa::new(d.nrows() as usize);
            spmsv_spa_into(d, f, &mut spa)
        }
        Kernel::Heap => spmsv_heap(d, f),
    }
}

/// SPA kernel with a caller-owned accumulator (sized to `d.nrows()`), so
/// repeated calls reuse one allocation.
pub fn spmsv_spa_into(d: &Dcsc, f: &SparseVector, spa: &mut Spa) -> Result<SparseVector> {
    check_frontier(d, f)?;
    if spa.len() as u64 != d.nrows() {
        return Err(Error::Contract(format!(
            "SPA of length {} for a block with {} rows",
            spa.len(),
            d.nrows()
        )));
    }
    for (col, value) in f.iter() {
        for &row in d.column(col) {
            spa.accumulate(row as usize, value);
        }
    }
    Ok(spa.drain_sorted(d.row_offset()))
}

/// Multiway merge of the selected column segments through a binary min-heap
/// keyed by row id.
pub fn spmsv_heap(d: &Dcsc, f: &SparseVector) -> Result<SparseVector> {
    check_frontier(d, f)?;
    let segments: Vec<(&[u64], u64)> = f
        .iter()
        .map(|(col, value)| (d.column(col), value))
        .filter(|(seg, _)| !seg.is_empty())
        .collect();
    let mut heap: BinaryHeap<Reverse<(u64, usize, usize)>> = segments
        .iter()
        .enumerate()
        .map(|(s, (seg, _))| Reverse((seg[0], s, 0)))
        .collect();
    let mut indices: Vec<u64> = Vec::new();
    let mut values: Vec<u64> = Vec::new();
    while let Some(Reverse((row, s, pos))) = heap.pop() {
        let (seg, value) = segments[s];
        match indices.last() {
            Some(&last) if last == row + d.row_offset() => {
                let v = values.last_mut().unwrap();
                *v = (*v).max(value);
            }
            _ => {
                indices.push(row + d.row_offset());
                values.push(value);
            }
        }
        if pos + 1 < seg.len() {
            heap.push(Reverse((seg[pos + 1], s, pos + 1)));
        }
    }
    SparseVector::new(indices, values)
}

/// Column-segment entries an SpMSV with frontier `f` touches.
pub fn spmsv_flop_count(d: &Dcsc, f: &SparseVector) -> usize {
    f.indices().iter().map(|&col| d.column(col).len()).sum()
}
