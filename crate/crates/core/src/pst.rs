//! Priority search tree for three-sided queries `[a, b] x [0, c)`.
//!
//! Every node holds exactly one point and a routing key `split`: points in
//! the left subtree have `x <= split`, points in the right subtree
//! `x > split`. Points are heap-ordered by `y` (smallest at the top), and a
//! point always sits on the routing path of its own `x`, so lookups by `x`
//! walk a single root path.
//!
//! Updates keep the tree weight-balanced: after an insert or delete the
//! highest node on the touched path whose heavier child carries more than
//! 70% of its weight is rebuilt from scratch.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Color, CostMeter, PredLink};

const NIL: u32 = u32::MAX;

/// A point of a three-sided structure. `tag` is an opaque payload (the
/// color, when the tree serves the color-reporting reduction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PstPoint {
    pub x: u64,
    pub y: u64,
    pub tag: u32,
}

impl PstPoint {
    pub const fn new(x: u64, y: u64, tag: u32) -> Self {
        PstPoint { x, y, tag }
    }
}

#[derive(Debug, Clone)]
struct Node {
    split: u64,
    point: PstPoint,
    left: u32,
    right: u32,
    weight: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Pst {
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    rebuilds: u64,
}

impl Pst {
    pub fn new() -> Self {
        Pst {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            rebuilds: 0,
        }
    }

    /// Builds a tree over `points`; `x` values must be distinct.
    pub fn build(mut points: Vec<PstPoint>) -> Result<Self> {
        points.sort_unstable_by_key(|p| p.x);
        if let Some(w) = points.windows(2).find(|w| w[0].x == w[1].x) {
            return Err(Error::DuplicateCoordinate(w[0].x));
        }
        let mut t = Pst::new();
        t.nodes.reserve(points.len());
        t.root = t.build_sorted(points);
        Ok(t)
    }

    /// Reduction points `(e, prev(e))` tagged with colors.
    pub fn from_colored(values: &[u64], prevs: &[PredLink], colors: &[Color]) -> Result<Self> {
        let pts = values
            .iter()
            .zip(prevs)
            .zip(colors)
            .map(|((&x, &y), &c)| PstPoint::new(x, y, c))
            .collect();
        Pst::build(pts)
    }

    pub fn len(&self) -> usize {
        self.weight(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    /// Point stored at the root, i.e. the one with the smallest `y`.
    pub fn root_point(&self) -> Option<PstPoint> {
        (self.root != NIL).then(|| self.nodes[self.root as usize].point)
    }

    /// Number of subtree rebuilds triggered by updates so far.
    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn height(&self) -> usize {
        fn go(t: &Pst, v: u32) -> usize {
            if v == NIL {
                0
            } else {
                let n = &t.nodes[v as usize];
                1 + go(t, n.left).max(go(t, n.right))
            }
        }
        go(self, self.root)
    }

    fn weight(&self, v: u32) -> u32 {
        if v == NIL {
            0
        } else {
            self.nodes[v as usize].weight
        }
    }

    fn alloc(&mut self, node: Node) -> u32 {
        if let Some(i) = self.free.pop() {
            self.nodes[i as usize] = node;
            i
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    fn build_sorted(&mut self, mut pts: Vec<PstPoint>) -> u32 {
        if pts.is_empty() {
            return NIL;
        }
        let top = pts
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| (p.y, p.x))
            .map(|(i, _)| i)
            .unwrap();
        let point = pts.remove(top);
        let weight = pts.len() as u32 + 1;
        if pts.is_empty() {
            return self.alloc(Node {
                split: point.x,
                point,
                left: NIL,
                right: NIL,
                weight,
            });
        }
        let mid = (pts.len() - 1) / 2;
        let split = pts[mid].x;
        let right_pts = pts.split_off(mid + 1);
        let left = self.build_sorted(pts);
        let right = self.build_sorted(right_pts);
        self.alloc(Node {
            split,
            point,
            left,
            right,
            weight,
        })
    }

    /// Appends every point with `a <= x <= b` and `y < c` to `out`.
    pub fn query(&self, a: u64, b: u64, c: u64, out: &mut Vec<PstPoint>, meter: &mut CostMeter) {
        self.query_limited(a, b, c, usize::MAX, out, meter);
    }

    /// Like [`Pst::query`] but stops once `limit` points have been reported.
    /// Returns false if it stopped early.
    pub fn query_limited(
        &self,
        a: u64,
        b: u64,
        c: u64,
        limit: usize,
        out: &mut Vec<PstPoint>,
        meter: &mut CostMeter,
    ) -> bool {
        if self.root == NIL || a > b {
            return true;
        }
        let mut reported = 0usize;
        let mut stack = Vec::with_capacity(32);
        stack.push(self.root);
        while let Some(v) = stack.pop() {
            let n = &self.nodes[v as usize];
            meter.touch(1);
            if n.point.y >= c {
                continue;
            }
            if a <= n.point.x && n.point.x <= b {
                if reported == limit {
                    return false;
                }
                out.push(n.point);
                reported += 1;
            }
            if n.right != NIL && b > n.split {
                stack.push(n.right);
            }
            if n.left != NIL && a <= n.split {
                stack.push(n.left);
            }
        }
        true
    }

    /// Lookup by `x`.
    pub fn get(&self, x: u64) -> Option<PstPoint> {
        let mut v = self.root;
        while v != NIL {
            let n = &self.nodes[v as usize];
            if n.point.x == x {
                return Some(n.point);
            }
            v = if x <= n.split { n.left } else { n.right };
        }
        None
    }

    pub fn contains(&self, x: u64) -> bool {
        self.get(x).is_some()
    }

    pub fn insert(&mut self, p: PstPoint) -> Result<()> {
        if self.contains(p.x) {
            return Err(Error::DuplicateCoordinate(p.x));
        }
        let mut path: Vec<u32> = Vec::new();
        let mut carry = p;
        let mut v = self.root;
        let mut parent = NIL;
        let mut went_left = false;
        while v != NIL {
            path.push(v);
            let n = &mut self.nodes[v as usize];
            n.weight += 1;
            if (carry.y, carry.x) < (n.point.y, n.point.x) {
                core::mem::swap(&mut carry, &mut n.point);
            }
            parent = v;
            went_left = carry.x <= n.split;
            v = if went_left { n.left } else { n.right };
        }
        let leaf = self.alloc(Node {
            split: carry.x,
            point: carry,
            left: NIL,
            right: NIL,
            weight: 1,
        });
        if parent == NIL {
            self.root = leaf;
        } else if went_left {
            self.nodes[parent as usize].left = leaf;
        } else {
            self.nodes[parent as usize].right = leaf;
        }
        self.rebalance(&path);
        Ok(())
    }

    /// Removes the point with coordinate `x` and returns it.
    pub fn delete(&mut self, x: u64) -> Result<PstPoint> {
        let mut path: Vec<u32> = Vec::new();
        let mut v = self.root;
        while v != NIL {
            path.push(v);
            let n = &self.nodes[v as usize];
            if n.point.x == x {
                break;
            }
            v = if x <= n.split { n.left } else { n.right };
        }
        if v == NIL {
            return Err(Error::NotFound(x));
        }
        let removed = self.nodes[v as usize].point;
        for &u in &path {
            self.nodes[u as usize].weight -= 1;
        }
        // Pull the smaller child point up until a childless node empties.
        let mut parent = if path.len() >= 2 {
            path[path.len() - 2]
        } else {
            NIL
        };
        loop {
            if v != path[path.len() - 1] {
                path.push(v);
            }
            let (l, r) = {
                let n = &self.nodes[v as usize];
                (n.left, n.right)
            };
            let pick = match (l != NIL, r != NIL) {
                (false, false) => NIL,
                (true, false) => l,
                (false, true) => r,
                (true, true) => {
                    let pl = self.nodes[l as usize].point;
                    let pr = self.nodes[r as usize].point;
                    if (pl.y, pl.x) <= (pr.y, pr.x) {
                        l
                    } else {
                        r
                    }
                }
            };
            if pick == NIL {
                if parent == NIL {
                    self.root = NIL;
                } else {
                    let pn = &mut self.nodes[parent as usize];
                    if pn.left == v {
                        pn.left = NIL;
                    } else {
                        pn.right = NIL;
                    }
                }
                self.free.push(v);
                break;
            }
            let moved = self.nodes[pick as usize].point;
            self.nodes[v as usize].point = moved;
            self.nodes[pick as usize].weight -= 1;
            parent = v;
            v = pick;
        }
        self.rebalance(&path);
        Ok(removed)
    }

    fn is_unbalanced(&self, v: u32) -> bool {
        let n = &self.nodes[v as usize];
        let heavy = self.weight(n.left).max(self.weight(n.right)) as u64;
        n.weight >= 4 && heavy * 10 > n.weight as u64 * 7
    }

    fn rebalance(&mut self, path: &[u32]) {
        // Nodes on the path may have been freed by a delete; only those still
        // reachable from the root along the path are considered.
        let mut parent = NIL;
        for &v in path {
            let reachable = if parent == NIL {
                self.root == v
            } else {
                let pn = &self.nodes[parent as usize];
                pn.left == v || pn.right == v
            };
            if !reachable {
                return;
            }
            if self.is_unbalanced(v) {
                self.rebuild_at(parent, v);
                return;
            }
            parent = v;
        }
    }

    fn rebuild_at(&mut self, parent: u32, v: u32) {
        let mut pts = Vec::with_capacity(self.nodes[v as usize].weight as usize);
        let mut stack = alloc::vec![v];
        while let Some(u) = stack.pop() {
            let n = &self.nodes[u as usize];
            pts.push(n.point);
            if n.left != NIL {
                stack.push(n.left);
            }
            if n.right != NIL {
                stack.push(n.right);
            }
            self.free.push(u);
        }
        pts.sort_unstable_by_key(|p| p.x);
        let fresh = self.build_sorted(pts);
        if parent == NIL {
            self.root = fresh;
        } else {
            let pn = &mut self.nodes[parent as usize];
            if pn.left == v {
                pn.left = fresh;
            } else {
                pn.right = fresh;
            }
        }
        self.rebuilds += 1;
    }

    /// All stored points, in no particular order.
    pub fn points(&self) -> Vec<PstPoint> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        if self.root != NIL {
            stack.push(self.root);
        }
        while let Some(v) = stack.pop() {
            let n = &self.nodes[v as usize];
            out.push(n.point);
            for c in [n.left, n.right] {
                if c != NIL {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Checks heap order, routing-key order, weights and balance. Returns a
    /// description of the first violation.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        fn go(
            t: &Pst,
            v: u32,
            lo: Option<u64>,
            hi: Option<u64>,
            min_y: (u64, u64),
        ) -> core::result::Result<u32, &'static str> {
            if v == NIL {
                return Ok(0);
            }
            let n = &t.nodes[v as usize];
            let p = n.point;
            if lo.is_some_and(|lo| p.x <= lo) || hi.is_some_and(|hi| p.x > hi) {
                return Err("point outside its routing interval");
            }
            if lo.is_some_and(|lo| n.split < lo) || hi.is_some_and(|hi| n.split > hi) {
                return Err("routing keys out of order");
            }
            if (p.y, p.x) < min_y {
                return Err("heap order violated");
            }
            let wl = go(t, n.left, lo, Some(n.split), (p.y, p.x))?;
            let wr = go(t, n.right, Some(n.split), hi, (p.y, p.x))?;
            if n.weight != 1 + wl + wr {
                return Err("weight mismatch");
            }
            if t.is_unbalanced(v) {
                return Err("weight balance violated");
            }
            Ok(n.weight)
        }
        go(self, self.root, None, None, (0, 0)).map(|_| ())
    }
}

/// Colors of `[a, b]` from a tree over `(e, prev(e))` points tagged with
/// colors: the points with `prev(e) < a` are exactly one per color.
pub fn color_query_slow(t: &Pst, a: u64, b: u64, out: &mut Vec<Color>, meter: &mut CostMeter) {
    let mut pts = Vec::new();
    t.query(a, b, a, &mut pts, meter);
    out.extend(pts.iter().map(|p| p.tag));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::compute_prev;
    use crate::test_fixtures::sample;
    use alloc::collections::BTreeSet;

    fn sample_tree() -> Pst {
        let pts = sample();
        let prev = compute_prev(&pts);
        let xs: Vec<u64> = pts.iter().map(|p| p.value).collect();
        let cs: Vec<u32> = pts.iter().map(|p| p.color).collect();
        Pst::from_colored(&xs, &prev, &cs).unwrap()
    }

    fn xy(out: &[PstPoint]) -> BTreeSet<(u64, u64)> {
        out.iter().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn build_small() {
        let t = Pst::build(Vec::new()).unwrap();
        assert!(t.is_empty());
        let t = Pst::build(alloc::vec![PstPoint::new(5, 0, 0)]).unwrap();
        assert_eq!(t.root_point(), Some(PstPoint::new(5, 0, 0)));
        let dup = alloc::vec![PstPoint::new(5, 0, 0), PstPoint::new(5, 1, 0)];
        assert_eq!(Pst::build(dup).unwrap_err(), Error::DuplicateCoordinate(5));
        let t = sample_tree();
        assert_eq!(t.root_point().unwrap().y, 0);
        t.check_invariants().unwrap();
    }

    #[test]
    fn query_examples() {
        let t = sample_tree();
        let mut m = CostMeter::default();
        let mut out = Vec::new();
        t.query(4, 13, 4, &mut out, &mut m);
        assert_eq!(xy(&out), BTreeSet::from([(5, 1), (7, 0), (9, 3)]));
        out.clear();
        t.query(12, 12, 100, &mut out, &mut m);
        assert_eq!(xy(&out), BTreeSet::from([(12, 5)]));
        out.clear();
        t.query(1, 20, 0, &mut out, &mut m);
        assert!(out.is_empty());
    }

    #[test]
    fn color_query_examples() {
        let t = sample_tree();
        let mut m = CostMeter::default();
        let mut out = Vec::new();
        color_query_slow(&t, 4, 13, &mut out, &mut m);
        out.sort();
        assert_eq!(out, [0, 1, 2]);
        out.clear();
        color_query_slow(&t, 12, 12, &mut out, &mut m);
        assert_eq!(out, [0]);
        out.clear();
        color_query_slow(&t, 8, 8, &mut out, &mut m);
        assert!(out.is_empty());
    }

    #[test]
    fn updates() {
        let mut t = sample_tree();
        let mut m = CostMeter::default();
        let mut before = Vec::new();
        t.query(4, 13, 4, &mut before, &mut m);
        t.insert(PstPoint::new(6, 0, 9)).unwrap();
        t.check_invariants().unwrap();
        let mut after = Vec::new();
        t.query(4, 13, 4, &mut after, &mut m);
        let mut expect = xy(&before);
        expect.insert((6, 0));
        assert_eq!(xy(&after), expect);
        assert_eq!(
            t.insert(PstPoint::new(6, 3, 0)),
            Err(Error::DuplicateCoordinate(6))
        );
        t.delete(6).unwrap();
        t.check_invariants().unwrap();
        let mut again = Vec::new();
        t.query(4, 13, 4, &mut again, &mut m);
        assert_eq!(xy(&again), xy(&before));
        assert_eq!(t.delete(6), Err(Error::NotFound(6)));

        // Deleting the root promotes the next-smallest y.
        let root = t.root_point().unwrap();
        let mut ys: Vec<u64> = t.points().iter().map(|p| p.y).collect();
        ys.sort();
        t.delete(root.x).unwrap();
        assert_eq!(t.root_point().unwrap().y, ys[1]);
        t.check_invariants().unwrap();
    }

    #[test]
    fn ascending_inserts_stay_balanced() {
        let mut t = Pst::new();
        for x in 1..=2000u64 {
            t.insert(PstPoint::new(x, x / 3, 0)).unwrap();
        }
        t.check_invariants().unwrap();
        // log_{1/0.7}(2000) ~ 21.3
        assert!(t.height() <= 24, "height {}", t.height());
        for x in (1..=2000u64).step_by(2) {
            t.delete(x).unwrap();
        }
        t.check_invariants().unwrap();
        assert_eq!(t.len(), 1000);
    }
}
