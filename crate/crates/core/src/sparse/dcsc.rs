use super::Block2D;
use crate::error::{Error, Result};
use crate::graph::BlockPartition;

/// Doubly-compressed sparse columns.
///
/// Only nonempty columns are stored: `jc[k]` is the id of the k-th nonempty
/// column and `ir[cp[k]..cp[k + 1]]` are its row ids, ascending. Storage is
/// `O(nnz + nzc)` regardless of the column dimension, which keeps the
/// hypersparse blocks of a 2D decomposition cheap.
///
/// Row ids in `ir` are relative to `row_offset`, which is nonzero for the
/// stripes produced by [`split_rowwise`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dcsc {
    nrows: u64,
    ncols: u64,
    row_offset: u64,
    jc: Vec<u64>,
    cp: Vec<usize>,
    ir: Vec<u64>,
}

impl Dcsc {
    pub fn empty(nrows: u64, ncols: u64) -> Self {
        Dcsc {
            nrows,
            ncols,
            row_offset: 0,
            jc: Vec::new(),
            cp: vec![0],
            ir: Vec::new(),
        }
    }

    /// Builds from `(row, col)` pairs in any order; duplicates collapse.
    pub fn from_entries(
        nrows: u64,
        ncols: u64,
        entries: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self> {
        let mut by_col: Vec<(u64, u64)> = entries.into_iter().map(|(r, c)| (c, r)).collect();
        if let Some(&(c, r)) = by_col.iter().find(|&&(c, r)| r >= nrows || c >= ncols) {
            return Err(Error::Contract(format!(
                "entry ({r}, {c}) outside a {nrows}x{ncols} block"
            )));
        }
        by_col.sort_unstable();
        by_col.dedup();
        Ok(Self::from_col_sorted(nrows, ncols, 0, &by_col))
    }

    fn from_col_sorted(nrows: u64, ncols: u64, row_offset: u64, by_col: &[(u64, u64)]) -> Self {
        let mut d = Dcsc::empty(nrows, ncols);
        d.row_offset = row_offset;
        d.ir.reserve_exact(by_col.len());
        for &(c, r) in by_col {
            if d.jc.last() != Some(&c) {
                if !d.jc.is_empty() {
                    d.cp.push(d.ir.len());
                }
                d.jc.push(c);
            }
            d.ir.push(r);
        }
        if !d.jc.is_empty() {
            d.cp.push(d.ir.len());
        }
        d
    }

    pub fn nrows(&self) -> u64 {
        self.nrows
    }

    pub fn ncols(&self) -> u64 {
        self.ncols
    }

    pub fn row_offset(&self) -> u64 {
        self.row_offset
    }

    pub fn nnz(&self) -> usize {
        self.ir.len()
    }

    /// Number of nonempty columns.
    pub fn nzc(&self) -> usize {
        self.jc.len()
    }

    pub fn jc(&self) -> &[u64] {
        &self.jc
    }

    pub fn cp(&self) -> &[usize] {
        &self.cp
    }

    pub fn ir(&self) -> &[u64] {
        &self.ir
    }

    /// Total length of the three index arrays.
    pub fn storage_len(&self) -> usize {
        self.jc.len() + self.cp.len() + self.ir.len()
    }

    /// Row ids (relative to `row_offset`) of column `col`; empty when absent.
    pub fn column(&self, col: u64) -> &[u64] {
        match self.jc.binary_search(&col) {
            Ok(k) => &self.ir[self.cp[k]..self.cp[k + 1]],
            Err(_) => &[],
        }
    }

    /// `(row, col)` pairs in column-major order, rows including `row_offset`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.jc.iter().enumerate().flat_map(move |(k, &c)| {
            self.ir[self.cp[k]..self.cp[k + 1]]
                .iter()
                .map(move |&r| (r + self.row_offset, c))
        })
    }

    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.cp.len() == self.jc.len() + 1
            && self.cp[0] == 0
            && *self.cp.last().unwrap() == self.ir.len()
            && self.jc.windows(2).all(|w| w[0] < w[1])
            && self.jc.iter().all(|&c| c < self.ncols)
            && self
                .cp
                .windows(2)
                .all(|w| w[0] < w[1] && self.ir[w[0]..w[1]].windows(2).all(|r| r[0] < r[1]))
            && self.ir.iter().all(|&r| r < self.nrows);
        if ok {
            Ok(())
        } else {
            Err(Error::Integrity("DCSC arrays inconsistent".into()))
        }
    }
}

pub fn build_dcsc(b: &Block2D) -> Dcsc {
    let mut by_col: Vec<(u64, u64)> = b.edges.iter().map(|&(r, c)| (c, r)).collect();
    by_col.sort_unstable();
    by_col.dedup();
    Dcsc::from_col_sorted(b.nrows(), b.ncols(), 0, &by_col)
}

/// Splits `d` into `t` contiguous row stripes of `ceil(nrows / t)` rows.
/// Each piece keeps the full column dimension and records its first row in
/// `row_offset`.
pub fn split_rowwise(d: &Dcsc, t: usize) -> Result<Vec<Dcsc>> {
    let stripes = BlockPartition::new(d.nrows, t)?;
    let mut pieces: Vec<Vec<(u64, u64)>> = vec![Vec::new(); t];
    for (k, &c) in d.jc.iter().enumerate() {
        for &r in &d.ir[d.cp[k]..d.cp[k + 1]] {
            let s = stripes.owner(r);
            pieces[s].push((c, r - stripes.range(s).start));
        }
    }
    Ok(pieces
        .into_iter()
        .enumerate()
        .map(|(s, by_col)| {
            let range = stripes.range(s);
            Dcsc::from_col_sorted(
                range.end - range.start,
                d.ncols,
                d.row_offset + range.start,
                &by_col,
            )
        })
        .collect())
}
