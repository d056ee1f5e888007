use graphwave::comm::{run_ranks, CommPhase, ExecMode, ProcGrid, ReduceOp};
use proptest::prelude::*;

fn exchange(
    grid: ProcGrid,
    lens: &[Vec<usize>],
    mode: ExecMode,
) -> (Vec<Vec<Vec<u64>>>, graphwave::comm::CommStats) {
    let p = grid.size();
    run_ranks(grid, mode, |ctx| {
        let me = ctx.rank();
        let send = (0..p)
            .map(|d| {
                (0..lens[me][d] as u64)
                    .map(|k| (me * 1000 + d) as u64 * 1000 + k)
                    .collect()
            })
            .collect();
        ctx.alltoallv(&ctx.grid().world(), send)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sixteen_rank_alltoallv_conserves_words(
        lens in proptest::collection::vec(proptest::collection::vec(0usize..6, 16), 16)
    ) {
        let grid = ProcGrid::new(4, 4).unwrap();
        let (recv, stats) = exchange(grid, &lens, ExecMode::Concurrent);
        for (dst, bufs) in recv.iter().enumerate() {
            for (src, buf) in bufs.iter().enumerate() {
                prop_assert_eq!(buf.len(), lens[src][dst]);
                for (k, &w) in buf.iter().enumerate() {
                    prop_assert_eq!(w, (src * 1000 + dst) as u64 * 1000 + k as u64);
                }
            }
        }
        let off: usize = (0..16).flat_map(|s| (0..16).map(move |d| (s, d)))
            .filter(|(s, d)| s != d).map(|(s, d)| lens[s][d]).sum();
        let own: usize = (0..16).map(|r| lens[r][r]).sum();
        let msgs = (0..16).flat_map(|s| (0..16).map(move |d| (s, d)))
            .filter(|&(s, d)| s != d && lens[s][d] > 0).count();
        let c = stats.phase(CommPhase::Alltoall);
        prop_assert_eq!(c.words, off as u64);
        prop_assert_eq!(c.self_words, own as u64);
        prop_assert_eq!(c.input_words, (off + own) as u64);
        prop_assert_eq!(c.messages, msgs as u64);
        prop_assert!(stats.is_conserved());
        let sent: u64 = stats.per_rank.iter().map(|r| r.sent.get(CommPhase::Alltoall)).sum();
        prop_assert_eq!(sent, off as u64);
    }

    #[test]
    fn sequential_replay_matches_concurrent(
        lens in proptest::collection::vec(proptest::collection::vec(0usize..4, 6), 6)
    ) {
        let grid = ProcGrid::new(2, 3).unwrap();
        let a = exchange(grid, &lens, ExecMode::Sequential);
        let b = exchange(grid, &lens, ExecMode::Concurrent);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn row_and_column_collectives_on_a_grid() {
    let grid = ProcGrid::new(3, 2).unwrap();
    let (out, stats) = run_ranks(grid, ExecMode::Concurrent, |ctx| {
        let (i, j) = ctx.coords();
        let col = ctx.allgatherv(&ctx.grid().col_group(j), vec![i as u64; i + 1])?;
        let sum = ctx.allreduce(&ctx.grid().row_group(i), ReduceOp::Sum, ctx.rank() as u64)?;
        Ok((col, sum))
    })
    .unwrap();
    for (rank, (col, sum)) in out.iter().enumerate() {
        let (i, _) = grid.coords(rank);
        assert_eq!(col, &vec![0, 1, 1, 2, 2, 2]);
        let row: u64 = grid.row_group(i).members().iter().map(|&r| r as u64).sum();
        assert_eq!(*sum, row);
    }
    // each column: 6 words contributed, each member receives the 5 - own others
    let ag = stats.phase(CommPhase::Allgather);
    assert_eq!(ag.input_words, 12);
    assert_eq!(ag.received_words, 2 * (5 + 4 + 3));
    assert!(stats.is_conserved());
}
