//! Priority search tree with one node per block.
//!
//! Record 0 of a node block is `[split, left, right, count]`; records
//! `1..=count` are points `[x, y, color, 0]`, ascending by `y`. A node holds
//! the `B - 1` points of smallest `y` in its subtree; the rest are halved by
//! `x`, with `split` the first `x` of the right half. Only full nodes have
//! children, so a three-sided query reads `O(height + k/B)` blocks.

use alloc::vec;
use alloc::vec::Vec;

use super::store::{BlockStore, Io, Record, NIL};
use crate::types::{Color, CostMeter};

/// Builds over points sorted by `x`; returns the root block or [`NIL`].
pub(crate) fn build(store: &mut BlockStore, pts: &[Record]) -> u64 {
    if pts.is_empty() {
        return NIL;
    }
    let b = store.block_size();
    let blk = store.alloc(b);
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_unstable_by_key(|&i| (pts[i][1], pts[i][0]));
    let take = (b - 1).min(pts.len());
    let mut chosen = vec![false; pts.len()];
    for &i in &idx[..take] {
        chosen[i] = true;
    }
    let rest: Vec<Record> = (0..pts.len())
        .filter(|&i| !chosen[i])
        .map(|i| pts[i])
        .collect();
    let (mut split, mut left, mut right) = (u64::MAX, NIL, NIL);
    if !rest.is_empty() {
        let mid = rest.len().div_ceil(2);
        left = build(store, &rest[..mid]);
        if mid < rest.len() {
            split = rest[mid][0];
            right = build(store, &rest[mid..]);
        }
    }
    let base = blk * b as u64;
    store.write(base, [split, left, right, take as u64]);
    for (k, &i) in idx[..take].iter().enumerate() {
        store.write(base + 1 + k as u64, pts[i]);
    }
    blk
}

/// Colors of points with `a <= x <= b` and `y < c`.
pub(crate) fn query(
    store: &BlockStore,
    root: u64,
    a: u64,
    b: u64,
    c: u64,
    out: &mut Vec<Color>,
    meter: &mut CostMeter,
) {
    let full = store.block_size() as u64 - 1;
    let mut stack = vec![root];
    while let Some(blk) = stack.pop() {
        if blk == NIL {
            continue;
        }
        let recs = store.read(blk, Io::Report, meter);
        let [split, left, right, count] = recs[0];
        let mut descend = count == full;
        for p in &recs[1..=count as usize] {
            if p[1] >= c {
                descend = false;
                break;
            }
            if a <= p[0] && p[0] <= b {
                out.push(p[2] as Color);
            }
        }
        if descend {
            if b >= split {
                stack.push(right);
            }
            if a < split {
                stack.push(left);
            }
        }
    }
}

/// Heap order, `x` partition and fill rules; returns the point count.
pub(crate) fn audit(store: &BlockStore, root: u64) -> core::result::Result<usize, &'static str> {
    fn walk(
        store: &BlockStore,
        blk: u64,
        lo: u64,
        hi: u64,
        min_y: (u64, u64),
    ) -> core::result::Result<usize, &'static str> {
        if blk == NIL {
            return Ok(0);
        }
        if blk as usize >= store.block_count() {
            return Err("node pointer out of range");
        }
        let recs = store.peek(blk);
        let [split, left, right, count] = recs[0];
        let full = store.block_size() as u64 - 1;
        if count == 0 || count > full {
            return Err("node point count");
        }
        let pts = &recs[1..=count as usize];
        let mut last = min_y;
        for p in pts {
            if (p[1], p[0]) < last {
                return Err("heap order violated");
            }
            if p[0] < lo || p[0] > hi {
                return Err("point outside node interval");
            }
            last = (p[1], p[0]);
        }
        if count < full && (left != NIL || right != NIL) {
            return Err("partial node with children");
        }
        if right != NIL && left == NIL {
            return Err("right child without left");
        }
        let below = if right == NIL {
            hi
        } else {
            split.checked_sub(1).ok_or("split")?
        };
        let l = walk(store, left, lo, below, last)?;
        let r = if right == NIL {
            0
        } else {
            walk(store, right, split, hi, last)?
        };
        Ok(count as usize + l + r)
    }
    walk(store, root, 0, u64::MAX, (0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_brute_force() {
        for b in [2usize, 3, 4, 8] {
            let mut store = BlockStore::new(b).unwrap();
            let pts: Vec<Record> = (1..=60u64).map(|x| [x, (x * 17) % 23, x % 5, 0]).collect();
            let root = build(&mut store, &pts);
            assert_eq!(audit(&store, root), Ok(60));
            for (a, hi, c) in [(1, 60, 5), (10, 20, 23), (30, 31, 0), (5, 55, 12)] {
                let mut m = CostMeter::default();
                let mut out = Vec::new();
                query(&store, root, a, hi, c, &mut out, &mut m);
                let mut want: Vec<Color> = pts
                    .iter()
                    .filter(|p| a <= p[0] && p[0] <= hi && p[1] < c)
                    .map(|p| p[2] as Color)
                    .collect();
                out.sort_unstable();
                want.sort_unstable();
                assert_eq!(out, want);
            }
        }
    }
}
