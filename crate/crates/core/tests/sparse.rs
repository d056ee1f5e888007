use graphwave::graph::EdgeList;
use graphwave::sparse::{
    build_dcsc, partition_2d, split_rowwise, spmsv, Backend, Dcsc, SparseVector,
};
use proptest::prelude::*;

fn entries_64() -> impl Strategy<Value = Vec<(u64, u64)>> {
    proptest::collection::vec((0u64..64, 0u64..64), 0..400)
}

proptest! {
    #[test]
    fn dcsc_densifies_to_its_input(entries in entries_64()) {
        let d = Dcsc::from_entries(64, 64, entries.iter().copied()).unwrap();
        d.check_invariants().unwrap();
        let mut dense = [[false; 64]; 64];
        for &(r, c) in &entries {
            dense[r as usize][c as usize] = true;
        }
        let mut back = [[false; 64]; 64];
        for (r, c) in d.entries() {
            prop_assert!(!back[r as usize][c as usize]);
            back[r as usize][c as usize] = true;
        }
        prop_assert_eq!(dense, back);
        let nzc = (0..64).filter(|&c| (0..64).any(|r| dense[r][c])).count();
        prop_assert_eq!(d.nzc(), nzc);
    }

    #[test]
    fn spmsv_matches_dense_product(
        entries in entries_64(),
        frontier in proptest::collection::btree_map(0u64..64, 0u64..1000, 0..64),
        t in 1usize..5,
    ) {
        let d = Dcsc::from_entries(64, 64, entries.iter().copied()).unwrap();
        let f = SparseVector::from_pairs(frontier.iter().map(|(&c, &v)| (c, v))).unwrap();
        let mut want = Vec::new();
        for r in 0..64u64 {
            let best = entries.iter().filter(|e| e.0 == r)
                .filter_map(|&(_, c)| frontier.get(&c).copied()).max();
            if let Some(v) = best {
                want.push((r, v));
            }
        }
        for backend in [Backend::Spa, Backend::Heap] {
            let got: Vec<(u64, u64)> = spmsv(&d, &f, backend).unwrap().iter().collect();
            prop_assert_eq!(&got, &want);
            let striped: Vec<(u64, u64)> = split_rowwise(&d, t).unwrap().iter()
                .flat_map(|s| spmsv(s, &f, backend).unwrap().iter().collect::<Vec<_>>())
                .collect();
            prop_assert_eq!(&striped, &want);
        }
    }

    #[test]
    fn blocks_cover_the_loop_free_matrix_once(
        edges in proptest::collection::vec((0u64..40, 0u64..40), 0..200),
        p_r in 1usize..5,
        p_c in 1usize..5,
    ) {
        let g = EdgeList::new(40, edges.clone(), true).unwrap();
        let blocks = partition_2d(&g, p_r, p_c).unwrap();
        let mut all: Vec<(u64, u64)> = blocks.iter()
            .flat_map(|b| build_dcsc(b).entries().map(|(r, c)| (r + b.row_range.start, c + b.col_range.start)).collect::<Vec<_>>())
            .collect();
        all.sort();
        // self-loops are dropped
        let mut want: Vec<(u64, u64)> = edges.into_iter().filter(|(u, v)| u != v).collect();
        want.sort();
        want.dedup();
        prop_assert_eq!(all, want);
    }
}
