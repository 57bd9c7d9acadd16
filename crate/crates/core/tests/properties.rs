mod common;

use std::collections::BTreeMap;

use colorrange::oracle::{oracle_k_leftmost, oracle_k_rightmost, oracle_report};
use colorrange::{
    ColorIndex, ColoredPoint, DynConfig, DynIndex, EmIndex, Pst, PstPoint, Range, SlowIndex,
    StaticIndex,
};
use common::{as_set, has_duplicates};
use proptest::prelude::*;

/// Sorted points with distinct coordinates in `[1, 300]`.
fn points(max_len: usize, colors: u32) -> impl Strategy<Value = Vec<ColoredPoint>> {
    prop::collection::btree_map(1u64..=300, 0..colors, 0..=max_len).prop_map(|m| {
        m.into_iter()
            .map(|(v, c)| ColoredPoint::new(v, c))
            .collect()
    })
}

fn ranges() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((1u64..=310, 0u64..120), 1..40)
        .prop_map(|v| v.into_iter().map(|(a, w)| (a, a + w)).collect())
}

#[derive(Debug, Clone)]
enum Op {
    Insert(u64, u32),
    Delete(u64),
    Query(u64, u64),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            3 => (1u64..=400, 0u32..10).prop_map(|(v, c)| Op::Insert(v, c)),
            2 => (1u64..=400).prop_map(Op::Delete),
            2 => (1u64..=400, 0u64..150).prop_map(|(a, w)| Op::Query(a, a + w)),
        ],
        0..250,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn static_indexes_match_oracle(pts in points(120, 12), qs in ranges()) {
        let st = StaticIndex::build(&pts).unwrap();
        let slow = SlowIndex::build(&pts).unwrap();
        let dy = DynIndex::build(&pts).unwrap();
        let em4 = EmIndex::build(&pts, 4).unwrap();
        let em8 = EmIndex::build(&pts, 8).unwrap();
        for (a, b) in qs {
            let want = oracle_report(&pts, Range::new(a, b).unwrap());
            prop_assert_eq!(as_set(st.query(a, b).unwrap()), want.clone());
            prop_assert_eq!(as_set(slow.query(a, b).unwrap()), want.clone());
            prop_assert_eq!(as_set(dy.query(a, b).unwrap()), want.clone());
            for em in [&em4, &em8] {
                let got = em.query(a, b).unwrap();
                prop_assert!(!has_duplicates(&got));
                prop_assert_eq!(as_set(got), want.clone());
            }
        }
    }

    #[test]
    fn answers_have_no_duplicates(pts in points(120, 12), qs in ranges()) {
        let st = StaticIndex::build(&pts).unwrap();
        let slow = SlowIndex::build(&pts).unwrap();
        let dy = DynIndex::build(&pts).unwrap();
        for (a, b) in qs {
            prop_assert!(!has_duplicates(&st.query(a, b).unwrap()));
            prop_assert!(!has_duplicates(&slow.query(a, b).unwrap()));
            prop_assert!(!has_duplicates(&dy.query(a, b).unwrap()));
        }
    }

    #[test]
    fn dynamic_indexes_follow_updates(init in points(60, 10), ops in ops(), small in any::<bool>()) {
        let cfg = if small {
            DynConfig { leaf_param: Some(2), low_split_levels: Some(0) }
        } else {
            DynConfig::default()
        };
        let mut dy = DynIndex::build_with(&init, cfg).unwrap();
        let mut slow = SlowIndex::build(&init).unwrap();
        let mut model: BTreeMap<u64, u32> = init.iter().map(|p| (p.value, p.color)).collect();
        for op in ops {
            match op {
                Op::Insert(v, c) => {
                    let p = ColoredPoint::new(v, c);
                    let fresh = !model.contains_key(&v);
                    prop_assert_eq!(dy.insert(p).is_ok(), fresh);
                    prop_assert_eq!(slow.insert(p).is_ok(), fresh);
                    model.entry(v).or_insert(c);
                }
                Op::Delete(v) => {
                    let want = model.remove(&v);
                    prop_assert_eq!(dy.delete(v).ok(), want);
                    prop_assert_eq!(slow.delete(v).ok(), want);
                }
                Op::Query(a, b) => {
                    let pts: Vec<ColoredPoint> = model.iter().map(|(&v, &c)| ColoredPoint::new(v, c)).collect();
                    let want = oracle_report(&pts, Range::new(a, b).unwrap());
                    prop_assert_eq!(as_set(dy.query(a, b).unwrap()), want.clone());
                    prop_assert_eq!(as_set(slow.query(a, b).unwrap()), want);
                }
            }
            prop_assert_eq!(dy.len(), model.len());
        }
        prop_assert_eq!(dy.check_invariants(), Ok(()));
        prop_assert_eq!(slow.check_invariants(), Ok(()));
    }

    #[test]
    fn slow_selection_matches_oracle(pts in points(80, 8), qs in ranges(), k in 0usize..12) {
        let slow = SlowIndex::build(&pts).unwrap();
        for (a, b) in qs {
            let r = Range::new(a, b).unwrap();
            prop_assert_eq!(slow.k_leftmost(a, b, k), oracle_k_leftmost(&pts, r, k));
            prop_assert_eq!(slow.k_rightmost(a, b, k), oracle_k_rightmost(&pts, r, k));
        }
    }

    #[test]
    fn em_round_trip_preserves_traces(pts in points(200, 20), qs in ranges(), b in 2usize..10) {
        let em = EmIndex::build(&pts, b).unwrap();
        prop_assert_eq!(em.audit(), Ok(()));
        let bytes = em.to_bytes();
        let back = EmIndex::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        for (a, hi) in qs {
            let mut m1 = Default::default();
            let mut m2 = Default::default();
            let t1 = em.query_traced(a, hi, &mut m1).unwrap();
            let t2 = back.query_traced(a, hi, &mut m2).unwrap();
            prop_assert_eq!(t1, t2);
            prop_assert_eq!(m1, m2);
        }
    }

    #[test]
    fn pst_updates_keep_invariants(ops in prop::collection::vec((1u64..200, 0u64..50, any::<bool>()), 0..300)) {
        let mut t = Pst::new();
        let mut model: BTreeMap<u64, u64> = BTreeMap::new();
        for (x, y, ins) in ops {
            if ins {
                let ok = t.insert(PstPoint::new(x, y, 0)).is_ok();
                prop_assert_eq!(ok, !model.contains_key(&x));
                model.entry(x).or_insert(y);
            } else {
                prop_assert_eq!(t.delete(x).ok().map(|p| p.y), model.remove(&x));
            }
            prop_assert_eq!(t.check_invariants(), Ok(()));
        }
        let mut out = Vec::new();
        let mut m = Default::default();
        t.query(50, 150, 25, &mut out, &mut m);
        let mut got: Vec<u64> = out.iter().map(|p| p.x).collect();
        got.sort_unstable();
        let want: Vec<u64> = model.range(50..=150).filter(|(_, &y)| y < 25).map(|(&x, _)| x).collect();
        prop_assert_eq!(got, want);
    }
}
