//! Thread-per-rank simulation driver.
//!
//! Each rank runs the same program on its own thread. Collectives are
//! matched by (group, per-rank call count on that group): the last member to
//! arrive computes every member's result, charges the traffic to
//! [`CommStats`] and releases the others. Results depend only on the
//! contributions, never on arrival order.
//!
//! A rank that blocks while no other rank can make progress triggers deadlock
//! detection; members of one collective call that disagree on its kind,
//! phase, level or reduction operator raise a protocol error. In
//! [`ExecMode::Sequential`] a single baton is passed round-robin, so exactly
//! one rank executes at any moment.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::panic::Location;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use super::{CommPhase, CommStats, Group, ProcGrid};
use crate::error::{Error, Result};

/// Environment variable that forces [`ExecMode::Sequential`].
pub const SEQUENTIAL_ENV: &str = "GRAPHWAVE_SEQ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// One rank at a time, handed over round-robin at every block point.
    Sequential,
    /// Every rank on its own OS thread.
    #[default]
    Concurrent,
}

impl ExecMode {
    /// `Sequential` when `GRAPHWAVE_SEQ=1`, otherwise `Concurrent`.
    pub fn from_env() -> Self {
        match std::env::var(SEQUENTIAL_ENV) {
            Ok(v) if v.trim() == "1" => ExecMode::Sequential,
            _ => ExecMode::Concurrent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Max,
    /// Logical or; contributions are nonzero/zero, the result is 1/0.
    Or,
}

enum Op {
    Alltoallv(Vec<Vec<u64>>),
    Allgatherv(Vec<u64>),
    Allreduce(ReduceOp, u64),
}

impl Op {
    fn kind(&self) -> String {
        match self {
            Op::Alltoallv(_) => "alltoallv".into(),
            Op::Allgatherv(_) => "allgatherv".into(),
            Op::Allreduce(op, _) => format!("allreduce({op:?})"),
        }
    }
}

struct Arrival {
    op: Op,
    phase: CommPhase,
    level: u64,
    site: &'static Location<'static>,
}

enum Delivery {
    Buffers(Vec<Vec<u64>>),
    Flat(Vec<u64>),
    Scalar(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Running,
    Waiting,
    Finished,
}

struct BlockedAt {
    kind: String,
    group: Arc<[usize]>,
    site: &'static Location<'static>,
}

/// Group members and the per-rank call sequence number.
type CallKey = (Arc<[usize]>, u64);

struct State {
    status: Vec<Status>,
    blocked: Vec<Option<BlockedAt>>,
    pending: HashMap<CallKey, BTreeMap<usize, Arrival>>,
    delivered: Vec<Option<Delivery>>,
    /// Rank whose failure aborted the run.
    failed_by: Option<usize>,
    /// Error detected by the runtime itself (deadlock, protocol).
    runtime_error: Option<Error>,
    baton: usize,
    stats: CommStats,
}

struct Hub {
    grid: ProcGrid,
    mode: ExecMode,
    state: Mutex<State>,
    wake: Condvar,
}

impl Hub {
    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn may_run(&self, st: &State, rank: usize) -> bool {
        st.status[rank] == Status::Running
            && (self.mode == ExecMode::Concurrent || st.baton == rank)
    }

    /// Hands the baton on after `from` stopped running and checks whether any
    /// rank can still make progress.
    fn after_stop(&self, st: &mut State, from: usize) -> Option<String> {
        let p = st.status.len();
        if self.mode == ExecMode::Sequential {
            if let Some(next) = (1..=p)
                .map(|k| (from + k) % p)
                .find(|&r| st.status[r] == Status::Running)
            {
                st.baton = next;
            }
        }
        let any_running = st.status.contains(&Status::Running);
        let any_waiting = st.status.contains(&Status::Waiting);
        if any_running || !any_waiting || st.failed_by.is_some() {
            return None;
        }
        let mut msg = String::from("no rank can make progress;");
        for (r, b) in st.blocked.iter().enumerate() {
            match (st.status[r], b) {
                (Status::Waiting, Some(b)) => {
                    let _ = write!(
                        msg,
                        " rank {r} blocked in {} on group {:?} at {};",
                        b.kind, b.group, b.site
                    );
                }
                (Status::Finished, _) => {
                    let _ = write!(msg, " rank {r} finished;");
                }
                _ => {}
            }
        }
        Some(msg)
    }

    fn fail(&self, st: &mut State, origin: usize, err: Option<Error>) {
        if st.failed_by.is_none() {
            st.failed_by = Some(origin);
            st.runtime_error = err;
        }
        self.wake.notify_all();
    }
}

/// Handle a rank program uses to talk to its peers.
pub struct RankCtx<'a> {
    rank: usize,
    hub: &'a Hub,
    seq: RefCell<HashMap<Arc<[usize]>, u64>>,
    level: Cell<u64>,
}

impl RankCtx<'_> {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn grid(&self) -> ProcGrid {
        self.hub.grid
    }

    /// `(i, j)` position of this rank in the grid.
    pub fn coords(&self) -> (usize, usize) {
        self.hub.grid.coords(self.rank)
    }

    /// BFS level that subsequent collectives are charged to.
    pub fn set_level(&self, level: u64) {
        self.level.set(level);
    }

    pub fn level(&self) -> u64 {
        self.level.get()
    }

    /// Personalized exchange: `send[k]` goes to the k-th member of `group`;
    /// the result's k-th buffer came from the k-th member.
    #[track_caller]
    pub fn alltoallv(&self, group: &Group, send: Vec<Vec<u64>>) -> Result<Vec<Vec<u64>>> {
        self.alltoallv_as(group, CommPhase::Alltoall, send)
    }

    /// [`alltoallv`](Self::alltoallv) charged to an explicit phase.
    #[track_caller]
    pub fn alltoallv_as(
        &self,
        group: &Group,
        phase: CommPhase,
        send: Vec<Vec<u64>>,
    ) -> Result<Vec<Vec<u64>>> {
        if send.len() != group.len() {
            return Err(Error::Contract(format!(
                "rank {} supplied {} buffers to an alltoallv over {} ranks",
                self.rank,
                send.len(),
                group.len()
            )));
        }
        match self.collective(group, phase, Op::Alltoallv(send), Location::caller())? {
            Delivery::Buffers(b) => Ok(b),
            _ => unreachable!(),
        }
    }

    /// Every member receives all contributions concatenated in group order.
    #[track_caller]
    pub fn allgatherv(&self, group: &Group, local: Vec<u64>) -> Result<Vec<u64>> {
        match self.collective(
            group,
            CommPhase::Allgather,
            Op::Allgatherv(local),
            Location::caller(),
        )? {
            Delivery::Flat(v) => Ok(v),
            _ => unreachable!(),
        }
    }

    #[track_caller]
    pub fn allreduce(&self, group: &Group, op: ReduceOp, value: u64) -> Result<u64> {
        match self.collective(
            group,
            CommPhase::Allreduce,
            Op::Allreduce(op, value),
            Location::caller(),
        )? {
            Delivery::Scalar(v) => Ok(v),
            _ => unreachable!(),
        }
    }

    fn collective(
        &self,
        group: &Group,
        phase: CommPhase,
        op: Op,
        site: &'static Location<'static>,
    ) -> Result<Delivery> {
        let me = self.rank;
        if group.position(me).is_none() {
            return Err(Error::Protocol(format!(
                "rank {me} called {} at {site} on group {:?} without being a member",
                op.kind(),
                group.members()
            )));
        }
        if let Some(&bad) = group.members().iter().find(|&&r| r >= self.hub.grid.size()) {
            return Err(Error::Protocol(format!(
                "group {:?} names rank {bad} outside a {}-rank grid",
                group.members(),
                self.hub.grid.size()
            )));
        }
        let key = group.key();
        let seq = {
            let mut counters = self.seq.borrow_mut();
            let c = counters.entry(key.clone()).or_insert(0);
            *c += 1;
            *c
        };

        let mut st = self.hub.lock();
        if let Some(origin) = st.failed_by {
            return Err(Error::Aborted { origin });
        }
        let kind = op.kind();
        let slot = st.pending.entry((key.clone(), seq)).or_default();
        slot.insert(
            me,
            Arrival {
                op,
                phase,
                level: self.level.get(),
                site,
            },
        );
        if slot.len() == group.len() {
            let arrivals = st.pending.remove(&(key, seq)).unwrap();
            let members = group.members();
            return match complete(members, seq, arrivals, &mut st.stats) {
                Ok(deliveries) => {
                    let mut own = None;
                    for (rank, d) in deliveries {
                        if rank == me {
                            own = Some(d);
                        } else {
                            st.delivered[rank] = Some(d);
                            st.status[rank] = Status::Running;
                            st.blocked[rank] = None;
                        }
                    }
                    self.hub.wake.notify_all();
                    Ok(own.unwrap())
                }
                Err(msg) => {
                    self.hub
                        .fail(&mut st, me, Some(Error::Protocol(msg.clone())));
                    Err(Error::Protocol(msg))
                }
            };
        }

        st.status[me] = Status::Waiting;
        st.blocked[me] = Some(BlockedAt {
            kind,
            group: key,
            site,
        });
        if let Some(msg) = self.hub.after_stop(&mut st, me) {
            self.hub
                .fail(&mut st, me, Some(Error::Deadlock(msg.clone())));
            return Err(Error::Deadlock(msg));
        }
        self.hub.wake.notify_all();
        loop {
            if let Some(origin) = st.failed_by {
                return Err(Error::Aborted { origin });
            }
            if self.hub.may_run(&st, me) {
                if let Some(d) = st.delivered[me].take() {
                    return Ok(d);
                }
            }
            st = self.hub.wake.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }
}

fn complete(
    members: &[usize],
    seq: u64,
    arrivals: BTreeMap<usize, Arrival>,
    stats: &mut CommStats,
) -> std::result::Result<Vec<(usize, Delivery)>, String> {
    let first = arrivals.values().next().unwrap();
    let (kind, phase, level) = (first.op.kind(), first.phase, first.level);
    let consistent = arrivals
        .values()
        .all(|a| a.op.kind() == kind && a.phase == phase && a.level == level);
    if !consistent {
        let mut msg = format!("collective call #{seq} on group {members:?} does not match:");
        for (rank, a) in &arrivals {
            let _ = write!(
                msg,
                " rank {rank} called {} ({}, level {}) at {};",
                a.op.kind(),
                a.phase.name(),
                a.level,
                a.site
            );
        }
        return Err(msg);
    }

    let ops: Vec<Op> = arrivals.into_values().map(|a| a.op).collect();
    let g = members.len();
    let out = match ops[0] {
        Op::Alltoallv(_) => {
            let mut send: Vec<Vec<Vec<u64>>> = ops
                .into_iter()
                .map(|op| match op {
                    Op::Alltoallv(b) => b,
                    _ => unreachable!(),
                })
                .collect();
            let input: usize = send.iter().flatten().map(Vec::len).sum();
            stats.record_call(phase, level, input as u64);
            for (s, bufs) in send.iter().enumerate() {
                for (d, buf) in bufs.iter().enumerate() {
                    stats.record_send(phase, level, members[s], members[d], buf.len() as u64);
                }
            }
            let mut out = Vec::with_capacity(g);
            for d in 0..g {
                let recv: Vec<Vec<u64>> = (0..g).map(|s| std::mem::take(&mut send[s][d])).collect();
                let remote: usize = recv
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s != d)
                    .map(|(_, b)| b.len())
                    .sum();
                stats.record_receive(phase, level, members[d], remote as u64);
                out.push((members[d], Delivery::Buffers(recv)));
            }
            out
        }
        Op::Allgatherv(_) => {
            let parts: Vec<Vec<u64>> = ops
                .into_iter()
                .map(|op| match op {
                    Op::Allgatherv(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            let total: usize = parts.iter().map(Vec::len).sum();
            stats.record_call(phase, level, total as u64);
            for (s, part) in parts.iter().enumerate() {
                for (d, &dst) in members.iter().enumerate() {
                    let _ = d;
                    stats.record_send(phase, level, members[s], dst, part.len() as u64);
                }
            }
            let joined = parts.concat();
            members
                .iter()
                .zip(&parts)
                .map(|(&rank, own)| {
                    stats.record_receive(phase, level, rank, (total - own.len()) as u64);
                    (rank, Delivery::Flat(joined.clone()))
                })
                .collect()
        }
        Op::Allreduce(reduce, _) => {
            let mut values = Vec::with_capacity(g);
            for op in ops {
                match op {
                    Op::Allreduce(r, v) if r == reduce => values.push(v),
                    Op::Allreduce(r, _) => {
                        return Err(format!(
                            "collective call #{seq} on group {members:?} mixes reductions {reduce:?} and {r:?}"
                        ))
                    }
                    _ => unreachable!(),
                }
            }
            stats.record_call(phase, level, g as u64);
            for &src in members {
                for &dst in members {
                    stats.record_send(phase, level, src, dst, 1);
                }
            }
            let result = match reduce {
                ReduceOp::Sum => values.iter().copied().fold(0u64, u64::wrapping_add),
                ReduceOp::Max => values.iter().copied().max().unwrap_or(0),
                ReduceOp::Or => values.iter().any(|&v| v != 0) as u64,
            };
            members
                .iter()
                .map(|&rank| {
                    stats.record_receive(phase, level, rank, (g - 1) as u64);
                    (rank, Delivery::Scalar(result))
                })
                .collect()
        }
    };
    Ok(out)
}

/// Marks a rank finished when its program returns or unwinds.
struct FinishGuard<'a> {
    hub: &'a Hub,
    rank: usize,
    failed: bool,
}

impl Drop for FinishGuard<'_> {
    fn drop(&mut self) {
        let mut st = self.hub.lock();
        st.status[self.rank] = Status::Finished;
        st.blocked[self.rank] = None;
        if self.failed || std::thread::panicking() {
            self.hub.fail(&mut st, self.rank, None);
        }
        if let Some(msg) = self.hub.after_stop(&mut st, self.rank) {
            self.hub
                .fail(&mut st, self.rank, Some(Error::Deadlock(msg)));
        }
        self.hub.wake.notify_all();
    }
}

/// Runs `program` once per rank of `grid` and returns the per-rank results
/// (indexed by rank) together with the communication counters.
///
/// If any rank fails, the runtime's own error (deadlock, protocol) is
/// reported first, then the failing rank with the lowest id.
pub fn run_ranks<T, F>(grid: ProcGrid, mode: ExecMode, program: F) -> Result<(Vec<T>, CommStats)>
where
    T: Send,
    F: Fn(&RankCtx<'_>) -> Result<T> + Sync,
{
    let p = grid.size();
    let hub = Hub {
        grid,
        mode,
        state: Mutex::new(State {
            status: vec![Status::Running; p],
            blocked: (0..p).map(|_| None).collect(),
            pending: HashMap::new(),
            delivered: (0..p).map(|_| None).collect(),
            failed_by: None,
            runtime_error: None,
            baton: 0,
            stats: CommStats::new(grid.p_r(), grid.p_c()),
        }),
        wake: Condvar::new(),
    };

    let results: Vec<Result<T>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..p)
            .map(|rank| {
                let hub = &hub;
                let program = &program;
                scope.spawn(move || {
                    let mut guard = FinishGuard {
                        hub,
                        rank,
                        failed: false,
                    };
                    {
                        let mut st = hub.lock();
                        while !hub.may_run(&st, rank) {
                            if let Some(origin) = st.failed_by {
                                guard.failed = true;
                                return Err(Error::Aborted { origin });
                            }
                            st = hub.wake.wait(st).unwrap_or_else(|e| e.into_inner());
                        }
                    }
                    let ctx = RankCtx {
                        rank,
                        hub,
                        seq: RefCell::new(HashMap::new()),
                        level: Cell::new(0),
                    };
                    let out = program(&ctx);
                    guard.failed = out.is_err();
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join() {
                Ok(r) => r,
                Err(panic) => std::panic::resume_unwind(panic),
            })
            .collect()
    });

    let st = hub.state.into_inner().unwrap_or_else(|e| e.into_inner());
    if let Some(err) = st.runtime_error {
        return Err(err);
    }
    let mut values = Vec::with_capacity(p);
    let mut first_err = None;
    let mut aborted = None;
    for r in results {
        match r {
            Ok(v) => values.push(v),
            Err(e @ Error::Aborted { .. }) => {
                aborted.get_or_insert(e);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err.or(aborted) {
        return Err(e);
    }
    Ok((values, st.stats))
}
