//! 2D block decomposition, DCSC storage and sparse matrix-sparse vector
//! multiplication over the (select, max) semiring.

mod dcsc;
mod partition;
mod spmsv;

pub use dcsc::{build_dcsc, split_rowwise, Dcsc};
pub use partition::{partition_2d, Block2D};
pub use spmsv::{
    spmsv, spmsv_flop_count, spmsv_heap, spmsv_spa_into, Backend, Kernel, DEFAULT_HEAP_MIN_RANKS,
};

use crate::error::{Error, Result};

/// Sorted sparse vector of `u64` values (parent ids in BFS).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseVector {
    indices: Vec<u64>,
    values: Vec<u64>,
}

impl SparseVector {
    pub fn new(indices: Vec<u64>, values: Vec<u64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Contract(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Contract(format!(
                "sparse vector indices not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(SparseVector { indices, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let (indices, values) = pairs.into_iter().unzip();
        Self::new(indices, values)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u64) -> Option<u64> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|pos| self.values[pos])
    }

    /// Appends entries that all lie above the current last index.
    pub fn extend_sorted(&mut self, other: SparseVector) -> Result<()> {
        if let (Some(&last), Some(&first)) = (self.indices.last(), other.indices.first()) {
            if first <= last {
                return Err(Error::Contract(format!(
                    "cannot append index {first} after {last}"
                )));
            }
        }
        self.indices.extend(other.indices);
        self.values.extend(other.values);
        Ok(())
    }

    pub fn into_parts(self) -> (Vec<u64>, Vec<u64>) {
        (self.indices, self.values)
    }
}

/// Sparse accumulator: dense value array, occupancy bit mask and the list of
/// occupied slots. Combines colliding entries with `max`.
#[derive(Debug, Clone)]
pub struct Spa {
    values: Vec<u64>,
    occupied: Vec<u64>,
    touched: Vec<usize>,
    last_reset_work: usize,
}

impl Spa {
    pub fn new(len: usize) -> Self {
        Spa {
            values: vec![0; len],
            occupied: vec![0; len.div_ceil(64)],
            touched: Vec::new(),
            last_reset_work: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn is_occupied(&self, slot: usize) -> bool {
        self.occupied[slot / 64] & (1 << (slot % 64)) != 0
    }

    #[inline]
    pub fn accumulate(&mut self, slot: usize, value: u64) {
        let (word, bit) = (slot / 64, 1u64 << (slot % 64));
        if self.occupied[word] & bit == 0 {
            self.occupied[word] |= bit;
            self.values[slot] = value;
            self.touched.push(slot);
        } else if value > self.values[slot] {
            self.values[slot] = value;
        }
    }

    pub fn touched(&self) -> &[usize] {
        &self.touched
    }

    /// Emits the occupied slots in ascending order (shifted by `offset`) and
    /// clears only those slots.
    pub fn drain_sorted(&mut self, offset: u64) -> SparseVector {
        self.touched.sort_unstable();
        let mut indices = Vec::with_capacity(self.touched.len());
        let mut values = Vec::with_capacity(self.touched.len());
        for &slot in &self.touched {
            indices.push(offset + slot as u64);
            values.push(self.values[slot]);
            self.occupied[slot / 64] &= !(1 << (slot % 64));
        }
        self.last_reset_work = self.touched.len();
        self.touched.clear();
        SparseVector { indices, values }
    }

    /// Number of slots cleared by the most recent drain.
    pub fn last_reset_work(&self) -> usize {
        self.last_reset_work
    }

    /// Full O(len) scan; meant for tests.
    pub fn is_clear(&self) -> bool {
        self.touched.is_empty() && self.occupied.iter().all(|&w| w == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_vector_rejects_unsorted() {
        assert!(SparseVector::new(vec![2, 1], vec![0, 0]).is_err());
        assert!(SparseVector::new(vec![1, 1], vec![0, 0]).is_err());
        assert!(SparseVector::new(vec![1], vec![]).is_err());
        let v = SparseVector::from_pairs([(1, 10), (4, 3)]).unwrap();
        assert_eq!(v.get(4), Some(3));
        assert_eq!(v.get(2), None);
    }

    #[test]
    fn spa_combines_with_max_and_resets_touched_only() {
        let mut spa = Spa::new(1000);
        spa.accumulate(700, 3);
        spa.accumulate(5, 9);
        spa.accumulate(700, 8);
        spa.accumulate(700, 1);
        assert_eq!(spa.touched().len(), 2);
        let out = spa.drain_sorted(100);
        assert_eq!(out.indices(), &[105, 800]);
        assert_eq!(out.values(), &[9, 8]);
        assert_eq!(spa.last_reset_work(), 2);
        assert!(spa.is_clear());
        let out = spa.drain_sorted(0);
        assert!(out.is_empty());
        assert_eq!(spa.last_reset_work(), 0);
    }
}
