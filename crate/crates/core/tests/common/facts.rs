//! Randomized checks of the structural facts behind the query algorithms.
//! Each function runs `trials` trials and returns the number of violations.

use std::collections::{BTreeMap, BTreeSet};

use colorrange::stripe::{Stripe, StripePoint};
use colorrange::wb::WbTree;
use colorrange::{ColoredPoint, CostMeter, StaticIndex};
use rand::Rng;

use super::{instance, rng, ColorSets};

/// A range around `e` reaching up to `max` to either side.
fn around(r: &mut impl Rng, e: u64, max: u64) -> (u64, u64) {
    let spread = r.gen_range(0..=max);
    let a = e.saturating_sub(r.gen_range(0..=spread)).max(1);
    (a, e + r.gen_range(0..=spread))
}

fn static_lca(st: &StaticIndex, x: u32, y: u32) -> u32 {
    let mut up = BTreeSet::new();
    let mut v = Some(x);
    while let Some(u) = v {
        up.insert(u);
        v = st.parent(u);
    }
    let mut w = y;
    while !up.contains(&w) {
        w = st.parent(w).expect("common root");
    }
    w
}

/// The split node found through the ancestor keys, searched from the first
/// element of the range, equals the lowest common ancestor of the leaves
/// holding the first and last element.
pub fn static_hra(seed: u64, trials: usize) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < trials {
        let n = r.gen_range(2..3000);
        let u = 4 * n as u64;
        let pts = instance(&mut r, n, u, 16);
        let vals: Vec<u64> = pts.iter().map(|p| p.value).collect();
        let st = StaticIndex::build(&pts).unwrap();
        for _ in 0..100 {
            done += 1;
            let e = vals[r.gen_range(0..n)];
            let (a, b) = around(&mut r, e, u);
            let mut m = CostMeter::default();
            let pos = st.one_report(a, b, &mut m).expect("range holds e");
            let first = vals.partition_point(|&v| v < a);
            let last = vals.partition_point(|&v| v <= b) - 1;
            let (l1, l2) = (st.leaf_of_position(first), st.leaf_of_position(last));
            let brute = (l1 != l2).then(|| static_lca(&st, st.leaf_node(l1), st.leaf_node(l2)));
            if pos != first
                || st.hra_query(st.leaf_of_position(pos), vals[first], b, &mut m) != brute
            {
                bad += 1;
            }
        }
    }
    bad
}

/// On the root path of a leaf holding `e in [a, b]`, left parents have
/// `m > a` and right parents `m <= b`; both key lists are monotone.
pub fn static_keys(seed: u64, trials: usize) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < trials {
        let n = r.gen_range(2..3000);
        let u = 4 * n as u64;
        let pts = instance(&mut r, n, u, 16);
        let st = StaticIndex::build(&pts).unwrap();
        done += 1;
        if !st.path_keys_monotone() {
            bad += 1;
        }
        for _ in 0..99 {
            done += 1;
            let i = r.gen_range(0..n);
            let (a, b) = around(&mut r, pts[i].value, u);
            let leaf = st.leaf_of_position(i);
            let (k1, k2) = st.path_keys(leaf);
            let monotone = k1.windows(2).all(|w| w[0] < w[1]) && k2.windows(2).all(|w| w[0] > w[1]);
            if !st.path_signs_hold(leaf, a, b) || !monotone {
                bad += 1;
            }
        }
    }
    bad
}

/// Dynamic variants on the weight-balanced tree under updates: the key
/// search returns the highest ancestor with an inner middle value in
/// `(a, b]` (found here by scanning every ancestor), left keys are `<= e`
/// and non-increasing with height, right keys `> e` and non-decreasing.
pub fn wb_facts(seed: u64, trials: usize) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < trials {
        let n = r.gen_range(1..1500);
        let u = 4 * n as u64 + 64;
        let pts = instance(&mut r, n, u, 16);
        let mut model = ColorSets::new(&pts);
        let mut t = WbTree::build_with(&pts, Some(r.gen_range(2..10))).unwrap();
        for _ in 0..100 {
            done += 1;
            for _ in 0..r.gen_range(0..20) {
                let v = r.gen_range(1..=u);
                if model.contains(v) {
                    if model.len() > 1 {
                        t.delete(v).unwrap();
                        model.delete(v);
                    }
                } else {
                    let p = ColoredPoint::new(v, r.gen_range(0..16));
                    t.insert(p).unwrap();
                    model.insert(p);
                }
            }
            let e = model.pick(r.gen_range(1..=u)).expect("nonempty");
            let (a, b) = around(&mut r, e, u);
            let leaf = t.route(e);
            let mut brute = None;
            for v in t.path_up(leaf) {
                if t.mids(v).iter().skip(1).any(|&m| a < m && m <= b) {
                    brute = Some(v);
                }
            }
            let mut m = CostMeter::default();
            let (k1, k2) = t.leaf_keys(leaf);
            let ok = t.hra_query(leaf, a, b, &mut m) == brute
                && k1.iter().all(|&k| k <= e)
                && k2.iter().all(|&k| k > e)
                && k1.windows(2).all(|w| w[0] >= w[1])
                && k2.windows(2).all(|w| w[0] <= w[1]);
            if !ok {
                bad += 1;
            }
        }
    }
    bad
}

/// Narrow-stripe queries return exactly the points with `y >= c`, and the
/// probe thresholds of every `c` recover the true group extremes.
pub fn stripe_exact(seed: u64, trials: usize) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < trials {
        let n = r.gen_range(1..800);
        let h = r.gen_range(1..40u32);
        let u = 3 * n as u64;
        let mut s = Stripe::new(n, h);
        let mut model: BTreeMap<u64, u32> = BTreeMap::new();
        for _ in 0..n {
            let x = r.gen_range(1..=u);
            let y = r.gen_range(1..=h);
            if model.insert(x, y).is_none() {
                s.insert(StripePoint {
                    x,
                    y,
                    tag: (x % 7) as u32,
                })
                .unwrap();
            } else {
                model.insert(x, s.get(x).unwrap().y);
            }
        }
        done += 1;
        if !s.probe_thresholds_recover_extremes() {
            bad += 1;
        }
        for _ in 0..99 {
            done += 1;
            if r.gen_bool(0.3) {
                if let Some((&x, _)) = model.range(r.gen_range(1..=u)..).next() {
                    s.delete(x).unwrap();
                    model.remove(&x);
                }
            }
            let a = r.gen_range(1..=u);
            let b = a + r.gen_range(0..u);
            let c = r.gen_range(1..=h + 1);
            let mut m = CostMeter::default();
            let mut got: Vec<u64> = s.query(a, b, c, &mut m).into_iter().map(|p| p.x).collect();
            got.sort_unstable();
            let want: Vec<u64> = model
                .range(a..=b)
                .filter(|(_, &y)| y >= c)
                .map(|(&x, _)| x)
                .collect();
            if got != want {
                bad += 1;
            }
        }
    }
    bad
}
