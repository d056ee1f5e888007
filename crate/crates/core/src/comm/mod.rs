//! Simulated process grid with instrumented collectives.

mod runtime;
mod stats;
mod transpose;

pub use runtime::{run_ranks, ExecMode, RankCtx, ReduceOp, SEQUENTIAL_ENV};
pub use stats::{
    CommPhase, CommStats, LevelStats, PhaseCounters, PhaseTable, PhaseWords, RankTraffic,
};
pub use transpose::{transpose_vector, TransposeMode, VectorDist2D, VectorLayout};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logical `p_r x p_c` arrangement of ranks; rank `i * p_c + j` is `P(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcGrid {
    p_r: usize,
    p_c: usize,
}

impl ProcGrid {
    pub fn new(p_r: usize, p_c: usize) -> Result<Self> {
        if p_r == 0 || p_c == 0 {
            return Err(Error::Config(format!("empty {p_r}x{p_c} process grid")));
        }
        p_r.checked_mul(p_c)
            .ok_or_else(|| Error::Size(format!("{p_r}x{p_c} grid overflows")))?;
        Ok(ProcGrid { p_r, p_c })
    }

    /// `p x 1` grid used by the 1D engine.
    pub fn linear(p: usize) -> Self {
        assert!(p > 0, "linear grid needs at least one rank");
        ProcGrid { p_r: p, p_c: 1 }
    }

    pub fn p_r(&self) -> usize {
        self.p_r
    }

    pub fn p_c(&self) -> usize {
        self.p_c
    }

    pub fn size(&self) -> usize {
        self.p_r * self.p_c
    }

    pub fn is_square(&self) -> bool {
        self.p_r == self.p_c
    }

    pub fn rank_of(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.p_r && j < self.p_c);
        i * self.p_c + j
    }

    pub fn coords(&self, rank: usize) -> (usize, usize) {
        debug_assert!(rank < self.size());
        (rank / self.p_c, rank % self.p_c)
    }

    /// Processor row `P(i, :)`.
    pub fn row_group(&self, i: usize) -> Group {
        Group::from_sorted((0..self.p_c).map(|j| self.rank_of(i, j)).collect())
    }

    /// Processor column `P(:, j)`.
    pub fn col_group(&self, j: usize) -> Group {
        Group::from_sorted((0..self.p_r).map(|i| self.rank_of(i, j)).collect())
    }

    pub fn world(&self) -> Group {
        Group::from_sorted((0..self.size()).collect())
    }
}

/// Ordered set of ranks taking part in a collective.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    members: Arc<[usize]>,
}

impl Group {
    /// Members are sorted and deduplicated.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m: Vec<usize> = members.into_iter().collect();
        m.sort_unstable();
        m.dedup();
        if m.is_empty() {
            return Err(Error::Config("empty communication group".into()));
        }
        Ok(Self::from_sorted(m))
    }

    fn from_sorted(m: Vec<usize>) -> Self {
        Group { members: m.into() }
    }

    pub fn single(rank: usize) -> Self {
        Self::from_sorted(vec![rank])
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, rank: usize) -> Option<usize> {
        self.members.binary_search(&rank).ok()
    }

    pub(crate) fn key(&self) -> Arc<[usize]> {
        self.members.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuperPhase {
    Expand,
    Local,
    Fold,
    Update,
}

/// Level counter plus the phase within the level. Phases advance in the
/// order expand, local, fold, update; a new level restarts at expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Superstep {
    level: u64,
    phase: Option<SuperPhase>,
}

impl Superstep {
    pub fn new(level: u64) -> Self {
        Superstep { level, phase: None }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn phase(&self) -> Option<SuperPhase> {
        self.phase
    }

    /// Moves to `phase`; going backwards or repeating a phase is a contract
    /// violation.
    pub fn enter(&mut self, phase: SuperPhase) -> Result<()> {
        if self.phase.is_some_and(|cur| phase <= cur) {
            return Err(Error::Contract(format!(
                "phase {phase:?} after {:?} in level {}",
                self.phase.unwrap(),
                self.level
            )));
        }
        self.phase = Some(phase);
        Ok(())
    }

    pub fn next_level(&mut self) {
        self.level += 1;
        self.phase = None;
    }
}
