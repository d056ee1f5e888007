use serde::{Deserialize, Serialize};

/// Communication phase a collective is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommPhase {
    Alltoall,
    Allgather,
    Transpose,
    Allreduce,
}

impl CommPhase {
    pub const ALL: [CommPhase; 4] = [
        CommPhase::Alltoall,
        CommPhase::Allgather,
        CommPhase::Transpose,
        CommPhase::Allreduce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommPhase::Alltoall => "alltoall",
            CommPhase::Allgather => "allgather",
            CommPhase::Transpose => "transpose",
            CommPhase::Allreduce => "allreduce",
        }
    }
}

/// Counters for one phase. A word is one 64-bit value.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounters {
    /// Words contributed by all participants, self-sends included.
    pub input_words: u64,
    /// Words sent over the network (self-sends excluded).
    pub words: u64,
    /// Words received over the network, tallied on the receiving side.
    pub received_words: u64,
    /// Words a rank addressed to itself.
    pub self_words: u64,
    /// Non-empty remote point-to-point transfers.
    pub messages: u64,
    /// Collective invocations (one per group per call).
    pub calls: u64,
}

impl PhaseCounters {
    pub fn add(&mut self, o: &PhaseCounters) {
        self.input_words += o.input_words;
        self.words += o.words;
        self.received_words += o.received_words;
        self.self_words += o.self_words;
        self.messages += o.messages;
        self.calls += o.calls;
    }

    pub fn is_conserved(&self) -> bool {
        self.words == self.received_words
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub alltoall: PhaseCounters,
    pub allgather: PhaseCounters,
    pub transpose: PhaseCounters,
    pub allreduce: PhaseCounters,
}

impl PhaseTable {
    pub fn get(&self, phase: CommPhase) -> &PhaseCounters {
        match phase {
            CommPhase::Alltoall => &self.alltoall,
            CommPhase::Allgather => &self.allgather,
            CommPhase::Transpose => &self.transpose,
            CommPhase::Allreduce => &self.allreduce,
        }
    }

    pub fn get_mut(&mut self, phase: CommPhase) -> &mut PhaseCounters {
        match phase {
            CommPhase::Alltoall => &mut self.alltoall,
            CommPhase::Allgather => &mut self.allgather,
            CommPhase::Transpose => &mut self.transpose,
            CommPhase::Allreduce => &mut self.allreduce,
        }
    }

    pub fn add(&mut self, o: &PhaseTable) {
        for phase in CommPhase::ALL {
            self.get_mut(phase).add(o.get(phase));
        }
    }

    pub fn network_words(&self) -> u64 {
        CommPhase::ALL.iter().map(|&p| self.get(p).words).sum()
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseWords {
    pub alltoall: u64,
    pub allgather: u64,
    pub transpose: u64,
    pub allreduce: u64,
}

impl PhaseWords {
    pub fn get(&self, phase: CommPhase) -> u64 {
        match phase {
            CommPhase::Alltoall => self.alltoall,
            CommPhase::Allgather => self.allgather,
            CommPhase::Transpose => self.transpose,
            CommPhase::Allreduce => self.allreduce,
        }
    }

    fn get_mut(&mut self, phase: CommPhase) -> &mut u64 {
        match phase {
            CommPhase::Alltoall => &mut self.alltoall,
            CommPhase::Allgather => &mut self.allgather,
            CommPhase::Transpose => &mut self.transpose,
            CommPhase::Allreduce => &mut self.allreduce,
        }
    }

    fn add(&mut self, o: &PhaseWords) {
        for phase in CommPhase::ALL {
            *self.get_mut(phase) += o.get(phase);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u64,
    #[serde(flatten)]
    pub phases: PhaseTable,
}

/// Network words a rank sent and received, and messages it sent, per phase.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTraffic {
    pub rank: usize,
    pub sent: PhaseWords,
    pub received: PhaseWords,
    pub messages: PhaseWords,
}

/// Exact communication accounting for one simulated run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommStats {
    pub p_r: usize,
    pub p_c: usize,
    #[serde(flatten)]
    pub phases: PhaseTable,
    pub per_level: Vec<LevelStats>,
    pub per_rank: Vec<RankTraffic>,
}

impl CommStats {
    pub fn new(p_r: usize, p_c: usize) -> Self {
        CommStats {
            p_r,
            p_c,
            phases: PhaseTable::default(),
            per_level: Vec::new(),
            per_rank: (0..p_r * p_c)
                .map(|rank| RankTraffic {
                    rank,
                    ..Default::default()
                })
                .collect(),
        }
    }

    pub fn ranks(&self) -> usize {
        self.per_rank.len()
    }

    pub fn phase(&self, phase: CommPhase) -> &PhaseCounters {
        self.phases.get(phase)
    }

    pub fn level(&self, level: u64) -> Option<&PhaseTable> {
        self.per_level
            .binary_search_by_key(&level, |l| l.level)
            .ok()
            .map(|i| &self.per_level[i].phases)
    }

    fn level_mut(&mut self, level: u64) -> &mut PhaseTable {
        let i = match self.per_level.binary_search_by_key(&level, |l| l.level) {
            Ok(i) => i,
            Err(i) => {
                self.per_level.insert(
                    i,
                    LevelStats {
                        level,
                        phases: PhaseTable::default(),
                    },
                );
                i
            }
        };
        &mut self.per_level[i].phases
    }

    fn both(&mut self, phase: CommPhase, level: u64, f: impl Fn(&mut PhaseCounters)) {
        f(self.phases.get_mut(phase));
        f(self.level_mut(level).get_mut(phase));
    }

    pub(crate) fn record_call(&mut self, phase: CommPhase, level: u64, input_words: u64) {
        self.both(phase, level, |c| {
            c.calls += 1;
            c.input_words += input_words;
        });
    }

    pub(crate) fn record_send(
        &mut self,
        phase: CommPhase,
        level: u64,
        src: usize,
        dst: usize,
        words: u64,
    ) {
        if words == 0 {
            return;
        }
        if src == dst {
            self.both(phase, level, |c| c.self_words += words);
        } else {
            self.both(phase, level, |c| {
                c.words += words;
                c.messages += 1;
            });
            *self.per_rank[src].sent.get_mut(phase) += words;
            *self.per_rank[src].messages.get_mut(phase) += 1;
        }
    }

    pub(crate) fn record_receive(&mut self, phase: CommPhase, level: u64, dst: usize, words: u64) {
        if words == 0 {
            return;
        }
        self.both(phase, level, |c| c.received_words += words);
        *self.per_rank[dst].received.get_mut(phase) += words;
    }

    /// Sent words equal received words for every phase, overall and per level.
    pub fn is_conserved(&self) -> bool {
        let table_ok = |t: &PhaseTable| CommPhase::ALL.iter().all(|&p| t.get(p).is_conserved());
        let rank_ok = CommPhase::ALL.iter().all(|&p| {
            let sent: u64 = self.per_rank.iter().map(|r| r.sent.get(p)).sum();
            let recv: u64 = self.per_rank.iter().map(|r| r.received.get(p)).sum();
            sent == recv && sent == self.phases.get(p).words
        });
        table_ok(&self.phases) && self.per_level.iter().all(|l| table_ok(&l.phases)) && rank_ok
    }

    pub fn network_words(&self) -> u64 {
        self.phases.network_words()
    }

    /// Adds another run's counters (same grid) into this one.
    pub fn accumulate(&mut self, other: &CommStats) {
        assert_eq!(
            (self.p_r, self.p_c),
            (other.p_r, other.p_c),
            "accumulating stats from different grids"
        );
        self.phases.add(&other.phases);
        for l in &other.per_level {
            self.level_mut(l.level).add(&l.phases);
        }
        for (mine, theirs) in self.per_rank.iter_mut().zip(&other.per_rank) {
            mine.sent.add(&theirs.sent);
            mine.received.add(&theirs.received);
            mine.messages.add(&theirs.messages);
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
