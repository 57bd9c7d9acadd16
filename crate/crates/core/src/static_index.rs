//! Static index with reporting cost linear in the answer size.
//!
//! Elements are cut into leaves of `ceil(log2 N)` consecutive points and a
//! balanced binary tree is built over the leaves. Every node `u` has a
//! middle value `m(u)`, the smallest element of its right subtree. A right
//! child keeps `L(u)`: the leftmost element of each color in its subtree,
//! the `log N` smallest of them, ascending. A left child keeps `R(u)`: the
//! rightmost element of each color, the `log N` largest, descending.
//!
//! A query locates some element of `[a, b]`, finds the highest ancestor `u`
//! of its leaf with `a < m(u) <= b` (the split node of the range), and reads
//! `R(u_l)` downward from the split and `L(u_r)` upward. When either list
//! runs out while still inside the range, the range holds at least `log N`
//! colors and a priority search tree answers it in `O(log N + k)`, which is
//! `O(k)` in that case.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::ColorIndex;
use crate::input::{compute_next, compute_prev, palette_size, validate_sorted};
use crate::pst::{color_query_slow, Pst, PstPoint};
use crate::types::{ceil_log2, Color, ColoredPoint, CostMeter, QueryScratch};

const NIL: u32 = u32::MAX;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ListEntry {
    pub(crate) value: u64,
    pub(crate) color: Color,
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) parent: u32,
    pub(crate) left: u32,
    pub(crate) right: u32,
    pub(crate) height: u32,
    /// Smallest element of the right subtree; 0 for leaves.
    pub(crate) m: u64,
    /// `L(u)` for right children, `R(u)` for left children, empty at the root.
    pub(crate) list: Vec<ListEntry>,
    /// Leaf number for leaves, `NIL` otherwise.
    pub(crate) leaf: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Leaf {
    pub(crate) start: usize,
    pub(crate) end: usize,
    pub(crate) node: u32,
    /// Three-sided structure over `(e, prev(e))`.
    pub(crate) points: Pst,
    /// Middle values of left parents on the root path, by height.
    pub(crate) k1: Vec<(u64, u32)>,
    /// Middle values of right parents on the root path, by height.
    pub(crate) k2: Vec<(u64, u32)>,
}

/// How a query was answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryPath {
    Empty,
    /// The range falls inside a single leaf.
    Leaf,
    /// Answered from `R(u_l)` and `L(u_r)`.
    Lists,
    /// A list was exhausted and the slow structure answered.
    Fallback,
}

#[derive(Debug, Clone)]
pub struct StaticIndex {
    pub(crate) values: Vec<u64>,
    pub(crate) colors: Vec<Color>,
    pub(crate) prevs: Vec<u64>,
    pub(crate) leaf_size: usize,
    pub(crate) list_cap: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) leaves: Vec<Leaf>,
    pub(crate) root: u32,
    pub(crate) fallback: Pst,
    pub(crate) palette: usize,
}

impl StaticIndex {
    /// Builds the index over points sorted by strictly increasing value.
    pub fn build(points: &[ColoredPoint]) -> Result<Self> {
        let log_n = ceil_log2(points.len() as u64) as usize;
        StaticIndex::with_params(points, log_n, log_n)
    }

    /// Build with explicit leaf size and list capacity (both at least 1).
    pub(crate) fn with_params(
        points: &[ColoredPoint],
        leaf_size: usize,
        list_cap: usize,
    ) -> Result<Self> {
        let palette = palette_size(points);
        validate_sorted(points, palette)?;
        let n = points.len();
        let values: Vec<u64> = points.iter().map(|p| p.value).collect();
        let colors: Vec<Color> = points.iter().map(|p| p.color).collect();
        let prevs = compute_prev(points);
        let nexts = compute_next(points);

        let fallback = Pst::from_colored(&values, &prevs, &colors)?;
        let mut idx = StaticIndex {
            values,
            colors,
            prevs,
            leaf_size,
            list_cap,
            nodes: Vec::new(),
            leaves: Vec::new(),
            root: NIL,
            fallback,
            palette,
        };
        if n == 0 {
            return Ok(idx);
        }

        let leaf_count = n.div_ceil(idx.leaf_size);
        for l in 0..leaf_count {
            let start = l * idx.leaf_size;
            let end = (start + idx.leaf_size).min(n);
            let points = Pst::from_colored(
                &idx.values[start..end],
                &idx.prevs[start..end],
                &idx.colors[start..end],
            )?;
            idx.leaves.push(Leaf {
                start,
                end,
                node: NIL,
                points,
                k1: Vec::new(),
                k2: Vec::new(),
            });
        }

        let mut lmin: Vec<Vec<ListEntry>> = Vec::new();
        let mut rmax: Vec<Vec<ListEntry>> = Vec::new();
        idx.root = idx.build_node(0, leaf_count, NIL, &nexts, &mut lmin, &mut rmax);

        // Keep L on right children and R on left children.
        for v in 0..idx.nodes.len() {
            let parent = idx.nodes[v].parent;
            if parent == NIL {
                continue;
            }
            let list = if idx.nodes[parent as usize].right == v as u32 {
                core::mem::take(&mut lmin[v])
            } else {
                core::mem::take(&mut rmax[v])
            };
            idx.nodes[v].list = list;
        }

        for l in 0..leaf_count {
            let mut k1 = Vec::new();
            let mut k2 = Vec::new();
            let mut child = idx.leaves[l].node;
            let mut u = idx.nodes[child as usize].parent;
            while u != NIL {
                let node = &idx.nodes[u as usize];
                if node.left == child {
                    k1.push((node.m, u));
                } else {
                    k2.push((node.m, u));
                }
                child = u;
                u = node.parent;
            }
            idx.leaves[l].k1 = k1;
            idx.leaves[l].k2 = k2;
        }
        Ok(idx)
    }

    fn build_node(
        &mut self,
        first: usize,
        last: usize,
        parent: u32,
        nexts: &[u64],
        lmin: &mut Vec<Vec<ListEntry>>,
        rmax: &mut Vec<Vec<ListEntry>>,
    ) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            parent,
            left: NIL,
            right: NIL,
            height: 0,
            m: 0,
            list: Vec::new(),
            leaf: NIL,
        });
        lmin.push(Vec::new());
        rmax.push(Vec::new());
        let cap = self.list_cap;

        if last - first == 1 {
            let leaf = &mut self.leaves[first];
            leaf.node = id;
            let (start, end) = (leaf.start, leaf.end);
            let lo = self.values[start];
            let hi = self.values[end - 1];
            let mut l = Vec::new();
            for i in start..end {
                if self.prevs[i] < lo {
                    l.push(self.entry(i));
                    if l.len() == cap {
                        break;
                    }
                }
            }
            let mut r = Vec::new();
            for i in (start..end).rev() {
                if nexts[i] > hi {
                    r.push(self.entry(i));
                    if r.len() == cap {
                        break;
                    }
                }
            }
            lmin[id as usize] = l;
            rmax[id as usize] = r;
            self.nodes[id as usize].leaf = first as u32;
            return id;
        }

        let mid = first + (last - first).div_ceil(2);
        let left = self.build_node(first, mid, id, nexts, lmin, rmax);
        let right = self.build_node(mid, last, id, nexts, lmin, rmax);
        let lo = self.values[self.leaves[first].start];
        let hi = self.values[self.leaves[last - 1].end - 1];
        let m = self.values[self.leaves[mid].start];

        // Leftmost elements of the left child come first; the right child
        // contributes only colors absent from the left child.
        let mut l = lmin[left as usize].clone();
        if l.len() < cap {
            for e in &lmin[right as usize] {
                if l.len() == cap {
                    break;
                }
                if self.prev_of(e.value) < lo {
                    l.push(*e);
                }
            }
        }
        let mut r = rmax[right as usize].clone();
        if r.len() < cap {
            for e in &rmax[left as usize] {
                if r.len() == cap {
                    break;
                }
                if self.next_of(e.value, nexts) > hi {
                    r.push(*e);
                }
            }
        }
        lmin[id as usize] = l;
        rmax[id as usize] = r;

        let height = 1 + self.nodes[left as usize]
            .height
            .max(self.nodes[right as usize].height);
        let node = &mut self.nodes[id as usize];
        node.left = left;
        node.right = right;
        node.m = m;
        node.height = height;
        id
    }

    fn entry(&self, i: usize) -> ListEntry {
        ListEntry {
            value: self.values[i],
            color: self.colors[i],
        }
    }

    fn position(&self, value: u64) -> usize {
        self.values
            .binary_search(&value)
            .expect("list entries are stored values")
    }

    fn prev_of(&self, value: u64) -> u64 {
        self.prevs[self.position(value)]
    }

    fn next_of(&self, value: u64, nexts: &[u64]) -> u64 {
        nexts[self.position(value)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn list_cap(&self) -> usize {
        self.list_cap
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf holding the element at sorted position `pos`.
    pub fn leaf_of_position(&self, pos: usize) -> usize {
        pos / self.leaf_size
    }

    pub fn leaf_bounds(&self, leaf: usize) -> (usize, usize) {
        (self.leaves[leaf].start, self.leaves[leaf].end)
    }

    pub fn leaf_node(&self, leaf: usize) -> NodeId {
        self.leaves[leaf].node
    }

    pub fn root(&self) -> Option<NodeId> {
        (self.root != NIL).then_some(self.root)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.nodes[v as usize].parent;
        (p != NIL).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> Option<(NodeId, NodeId)> {
        let n = &self.nodes[v as usize];
        (n.left != NIL).then_some((n.left, n.right))
    }

    pub fn middle(&self, v: NodeId) -> u64 {
        self.nodes[v as usize].m
    }

    pub fn height(&self, v: NodeId) -> u32 {
        self.nodes[v as usize].height
    }

    /// The list stored at `v`, as `(value, color)` pairs.
    pub fn list(&self, v: NodeId) -> Vec<(u64, Color)> {
        self.nodes[v as usize]
            .list
            .iter()
            .map(|e| (e.value, e.color))
            .collect()
    }

    /// Total number of list entries over all nodes.
    pub fn list_storage(&self) -> usize {
        self.nodes.iter().map(|n| n.list.len()).sum()
    }

    /// Sorted position of some element in `[a, b]`.
    pub fn one_report(&self, a: u64, b: u64, meter: &mut CostMeter) -> Option<usize> {
        meter.locate(ceil_log2(self.values.len() as u64 + 1) as u64);
        let i = self.values.partition_point(|&v| v < a);
        (i < self.values.len() && self.values[i] <= b).then_some(i)
    }

    /// Highest ancestor `u` of `leaf` with `a < m(u) <= b`. Requires the
    /// leaf to hold an element of `[a, b]`.
    pub fn hra_query(&self, leaf: usize, a: u64, b: u64, meter: &mut CostMeter) -> Option<NodeId> {
        let l = &self.leaves[leaf];
        meter.locate(
            ceil_log2(l.k1.len() as u64 + 1) as u64 + ceil_log2(l.k2.len() as u64 + 1) as u64,
        );
        // K1 ascends with height: left parents with m <= b form a prefix.
        let i1 = l.k1.partition_point(|&(m, _)| m <= b);
        // K2 descends with height: right parents with m > a form a prefix.
        let i2 = l.k2.partition_point(|&(m, _)| m > a);
        let u1 = (i1 > 0).then(|| l.k1[i1 - 1].1);
        let u2 = (i2 > 0).then(|| l.k2[i2 - 1].1);
        match (u1, u2) {
            (Some(x), Some(y)) => Some(if self.height(x) >= self.height(y) {
                x
            } else {
                y
            }),
            (x, y) => x.or(y),
        }
    }

    /// Query that also reports which branch produced the answer.
    pub fn query_traced(
        &self,
        a: u64,
        b: u64,
        scratch: &mut QueryScratch,
    ) -> Result<(Vec<Color>, QueryPath)> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let meter = &mut scratch.meter;
        let Some(pos) = self.one_report(a, b, meter) else {
            return Ok((Vec::new(), QueryPath::Empty));
        };
        let leaf = self.leaf_of_position(pos);
        let mut out = Vec::new();
        // Searching from the first element instead of `a` selects the same
        // points and makes the split node the LCA of the boundary leaves.
        let Some(u) = self.hra_query(leaf, self.values[pos], b, meter) else {
            color_query_slow(&self.leaves[leaf].points, a, b, &mut out, meter);
            return Ok((out, QueryPath::Leaf));
        };
        let node = &self.nodes[u as usize];
        let (ul, ur) = (node.left, node.right);
        let cap = self.list_cap;

        let r_list = &self.nodes[ul as usize].list;
        let mut exhausted = true;
        for e in r_list {
            meter.touch(1);
            if e.value < a {
                exhausted = false;
                break;
            }
            out.push(e.color);
        }
        let mut fallback = exhausted && r_list.len() == cap;
        if !fallback {
            let l_list = &self.nodes[ur as usize].list;
            let mut exhausted = true;
            for e in l_list {
                meter.touch(1);
                if e.value > b {
                    exhausted = false;
                    break;
                }
                out.push(e.color);
            }
            fallback = exhausted && l_list.len() == cap;
        }
        if fallback {
            out.clear();
            color_query_slow(&self.fallback, a, b, &mut out, meter);
            return Ok((out, QueryPath::Fallback));
        }
        meter.touch(out.len() as u64);
        scratch.col.dedup(&mut out);
        Ok((out, QueryPath::Lists))
    }

    /// Fact check for tests: on the root path of `leaf`, left parents have
    /// `m > a` and right parents `m <= b`.
    pub fn path_signs_hold(&self, leaf: usize, a: u64, b: u64) -> bool {
        let l = &self.leaves[leaf];
        l.k1.iter().all(|&(m, _)| m > a) && l.k2.iter().all(|&(m, _)| m <= b)
    }

    /// K1 strictly ascending and K2 strictly descending for every leaf.
    pub fn path_keys_monotone(&self) -> bool {
        self.leaves.iter().all(|l| {
            l.k1.windows(2).all(|w| w[0].0 < w[1].0) && l.k2.windows(2).all(|w| w[0].0 > w[1].0)
        })
    }

    /// The middle values of `leaf`'s left and right parents, by height.
    pub fn path_keys(&self, leaf: usize) -> (Vec<u64>, Vec<u64>) {
        let l = &self.leaves[leaf];
        (
            l.k1.iter().map(|k| k.0).collect(),
            l.k2.iter().map(|k| k.0).collect(),
        )
    }

    /// Points of the three-sided reduction for one leaf.
    pub fn leaf_points(&self, leaf: usize) -> Vec<PstPoint> {
        self.leaves[leaf].points.points()
    }
}

impl ColorIndex for StaticIndex {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn palette(&self) -> usize {
        self.palette
    }

    fn query_with(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>> {
        self.query_traced(a, b, scratch).map(|(c, _)| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_report;
    use crate::test_fixtures::sample;
    use crate::types::Range;
    use alloc::collections::BTreeSet;

    fn set(v: Vec<Color>) -> BTreeSet<Color> {
        let n = v.len();
        let s: BTreeSet<Color> = v.into_iter().collect();
        assert_eq!(s.len(), n, "duplicate colors in answer");
        s
    }

    #[test]
    fn sample_shape() {
        let idx = StaticIndex::build(&sample()).unwrap();
        assert_eq!(idx.leaf_size(), 3);
        assert_eq!(idx.leaf_count(), 3);
        assert_eq!(idx.leaf_bounds(0), (0, 3));
        assert_eq!(idx.leaf_bounds(1), (3, 6));
        assert_eq!(idx.leaf_bounds(2), (6, 8));
        let root = idx.root().unwrap();
        // first point of the right subtree (leaf 2) is 15
        assert_eq!(idx.middle(root), 15);
        assert!(idx.list(root).is_empty());
        assert!(idx.path_keys_monotone());
    }

    #[test]
    fn tiny_and_empty() {
        let idx = StaticIndex::build(&[]).unwrap();
        assert!(idx.query(1, 100).unwrap().is_empty());
        let one = StaticIndex::build(&[ColoredPoint::new(4, 0)]).unwrap();
        assert_eq!(one.leaf_count(), 1);
        assert_eq!(one.query(1, 10).unwrap(), [0]);
        assert!(one.query(5, 10).unwrap().is_empty());
        let mut m = CostMeter::default();
        assert_eq!(one.hra_query(0, 1, 10, &mut m), None);
    }

    #[test]
    fn one_report_examples() {
        let idx = StaticIndex::build(&sample()).unwrap();
        let mut m = CostMeter::default();
        let hit = idx.one_report(4, 13, &mut m).unwrap();
        assert!([5, 7, 9, 12].contains(&idx.values[hit]));
        assert_eq!(idx.one_report(8, 8, &mut m), None);
        assert_eq!(idx.one_report(1, 1, &mut m).map(|i| idx.values[i]), Some(1));
    }

    #[test]
    fn query_examples() {
        let idx = StaticIndex::build(&sample()).unwrap();
        assert_eq!(set(idx.query(4, 13).unwrap()), BTreeSet::from([0, 1, 2]));
        assert!(idx.query(6, 6).unwrap().is_empty());
        assert_eq!(set(idx.query(1, 20).unwrap()), BTreeSet::from([0, 1, 2]));
        assert_eq!(idx.query(5, 4), Err(Error::InvalidRange { a: 5, b: 4 }));
    }

    #[test]
    fn hra_is_lca_on_sample() {
        let pts = sample();
        let idx = StaticIndex::build(&pts).unwrap();
        let mut m = CostMeter::default();
        // 5 sits in leaf 0, 12 in leaf 1: their LCA is the root's left child.
        let u = idx.hra_query(0, 4, 13, &mut m).unwrap();
        let lca = idx.parent(idx.leaf_node(0)).unwrap();
        assert_eq!(idx.parent(idx.leaf_node(1)), Some(lca));
        assert_eq!(u, lca);
        // inside one leaf
        assert_eq!(idx.hra_query(0, 2, 4, &mut m), None);
    }

    #[test]
    fn hra_from_first_element() {
        let idx = StaticIndex::build(&sample()).unwrap();
        let mut m = CostMeter::default();
        // [6, 12] holds 7, 9, 12, all in leaf 1, and 7 = m(parent). With `a`
        // the search stops above the leaf; from the first element it does not.
        let parent = idx.parent(idx.leaf_node(1)).unwrap();
        assert_eq!(idx.hra_query(1, 6, 12, &mut m), Some(parent));
        assert_eq!(idx.hra_query(1, 7, 12, &mut m), None);
        let mut s = QueryScratch::new(3);
        let (got, path) = idx.query_traced(6, 12, &mut s).unwrap();
        assert_eq!(
            (set(got), path),
            (BTreeSet::from([0, 1, 2]), QueryPath::Leaf)
        );
    }

    #[test]
    fn exhaustive_small() {
        let pts = sample();
        let idx = StaticIndex::build(&pts).unwrap();
        for a in 1..=22 {
            for b in a..=22 {
                let got = set(idx.query(a, b).unwrap());
                assert_eq!(
                    got,
                    oracle_report(&pts, Range::new(a, b).unwrap()),
                    "[{a},{b}]"
                );
            }
        }
    }
}
