//! Range tree with doubly exponential fanout: cheap updates, queries in
//! `O(sqrt(n_ab) + log log n + k)` node and element visits, where `n_ab` is
//! the number of elements in the range.
//!
//! The root has about `n^(1/2)` children, a depth-`d` node about
//! `n^(1/2^(d+1))`, and nodes with at most four elements are leaves. Every
//! element `e` with a same-color predecessor `prev(e)` is stored at exactly
//! one node: the child of `LCA(prev(e), e)` on the way to `e`. Elements
//! without a predecessor are stored at the root, and elements whose
//! predecessor shares their leaf are stored nowhere. A node keeps its stored
//! elements ordered by value (`V`) and by `prev` (`P`).
//!
//! For a query `[a, b]` the leftmost element of every color in the range
//! has `prev < a`; each one is stored at a node where the query finds it
//! with a range scan, so each color is reported once.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::{ColorIndex, DynamicColorIndex};
use crate::input::{compute_prev, palette_size, validate_sorted};
use crate::types::{ceil_sqrt, Color, ColoredPoint, CostMeter, QueryScratch, NO_PREV};

const NIL: u32 = u32::MAX;
const LEAF_MAX: usize = 4;
const LEAF_SPLIT: usize = 8;

#[derive(Debug, Clone, Default)]
struct SNode {
    parent: u32,
    depth: u32,
    lo: u64,
    leaf: bool,
    children: Vec<u32>,
    elems: Vec<u64>,
    /// Stored elements by value: value -> (prev, color).
    by_value: BTreeMap<u64, (u64, Color)>,
    /// Stored elements by prev: (prev, value, color).
    by_prev: BTreeSet<(u64, u64, Color)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Elem {
    color: Color,
    prev: u64,
    place: u32,
    leaf: u32,
}

#[derive(Debug, Clone)]
pub struct SlowIndex {
    nodes: Vec<SNode>,
    root: u32,
    elems: BTreeMap<u64, Elem>,
    chains: BTreeSet<(Color, u64)>,
    /// Target fanout per depth, fixed at the last rebuild.
    fanout: Vec<usize>,
    n0: usize,
    palette: usize,
    rebuilds: u64,
    node_splits: u64,
}

impl Default for SlowIndex {
    fn default() -> Self {
        SlowIndex::build(&[]).expect("empty input is valid")
    }
}

/// `ceil(n^(1/2)), ceil(n^(1/4)), ...` down to 2.
fn fanouts(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut f = ceil_sqrt(n.max(4) as u64) as usize;
    loop {
        out.push(f.max(2));
        if f <= 2 {
            break;
        }
        f = ceil_sqrt(f as u64) as usize;
    }
    out
}

impl SlowIndex {
    pub fn build(points: &[ColoredPoint]) -> Result<SlowIndex> {
        let palette = palette_size(points);
        validate_sorted(points, palette)?;
        let mut s = SlowIndex {
            nodes: Vec::new(),
            root: NIL,
            elems: BTreeMap::new(),
            chains: BTreeSet::new(),
            fanout: Vec::new(),
            n0: 0,
            palette,
            rebuilds: 0,
            node_splits: 0,
        };
        s.load(points);
        Ok(s)
    }

    fn load(&mut self, points: &[ColoredPoint]) {
        self.nodes.clear();
        self.elems.clear();
        self.chains.clear();
        self.n0 = points.len();
        self.fanout = fanouts(points.len());
        let values: Vec<u64> = points.iter().map(|p| p.value).collect();
        self.root = self.build_node(&values, 0, 0, NIL);
        let prevs = compute_prev(points);
        for (p, &prev) in points.iter().zip(&prevs) {
            self.chains.insert((p.color, p.value));
            self.elems.insert(
                p.value,
                Elem {
                    color: p.color,
                    prev,
                    place: NIL,
                    leaf: NIL,
                },
            );
        }
        for l in 0..self.nodes.len() {
            if self.nodes[l].leaf {
                for i in 0..self.nodes[l].elems.len() {
                    let v = self.nodes[l].elems[i];
                    self.elems.get_mut(&v).expect("indexed").leaf = l as u32;
                }
            }
        }
        for p in points {
            self.place(p.value);
        }
    }

    fn fanout_at(&self, depth: u32) -> usize {
        *self.fanout.get(depth as usize).unwrap_or(&2)
    }

    fn build_node(&mut self, values: &[u64], depth: u32, lo: u64, parent: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(SNode {
            parent,
            depth,
            lo,
            ..SNode::default()
        });
        if values.len() <= LEAF_MAX {
            let n = &mut self.nodes[id as usize];
            n.leaf = true;
            n.elems = values.to_vec();
            return id;
        }
        let f = self.fanout_at(depth);
        let t = values.len().div_ceil(f).clamp(2, 2 * f);
        let mut kids = Vec::with_capacity(t);
        let base = values.len() / t;
        let extra = values.len() % t;
        let mut s = 0;
        for i in 0..t {
            let len = base + usize::from(i < extra);
            let child_lo = if i == 0 { lo } else { values[s] };
            kids.push(self.build_node(&values[s..s + len], depth + 1, child_lo, id));
            s += len;
        }
        self.nodes[id as usize].children = kids;
        id
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn node_splits(&self) -> u64 {
        self.node_splits
    }

    /// Depth of the deepest leaf.
    pub fn height(&self) -> u32 {
        self.nodes
            .iter()
            .filter(|n| n.leaf)
            .map(|n| n.depth)
            .max()
            .unwrap_or(0)
    }

    pub fn color_of(&self, value: u64) -> Option<Color> {
        self.elems.get(&value).map(|e| e.color)
    }

    pub fn points(&self) -> Vec<ColoredPoint> {
        self.elems
            .iter()
            .map(|(&v, e)| ColoredPoint::new(v, e.color))
            .collect()
    }

    fn child_for(&self, v: u32, value: u64) -> u32 {
        let kids = &self.nodes[v as usize].children;
        let i = kids.partition_point(|&c| self.nodes[c as usize].lo <= value);
        kids[i.saturating_sub(1)]
    }

    fn route(&self, value: u64) -> u32 {
        let mut v = self.root;
        while !self.nodes[v as usize].leaf {
            v = self.child_for(v, value);
        }
        v
    }

    /// Node that should store `value`, or `NIL` when its predecessor shares
    /// its leaf.
    fn placement(&self, prev: u64, leaf: u32) -> u32 {
        if prev == NO_PREV {
            return self.root;
        }
        let mut v = leaf;
        if self.nodes[v as usize].lo <= prev {
            return NIL;
        }
        loop {
            let u = self.nodes[v as usize].parent;
            if u == NIL || self.nodes[u as usize].lo <= prev {
                return v;
            }
            v = u;
        }
    }

    fn unplace(&mut self, value: u64) {
        let e = self.elems[&value];
        if e.place != NIL {
            let n = &mut self.nodes[e.place as usize];
            n.by_value.remove(&value);
            n.by_prev.remove(&(e.prev, value, e.color));
        }
        self.elems.get_mut(&value).expect("indexed").place = NIL;
    }

    fn place(&mut self, value: u64) {
        let e = self.elems[&value];
        let at = self.placement(e.prev, e.leaf);
        if at != NIL {
            let n = &mut self.nodes[at as usize];
            n.by_value.insert(value, (e.prev, e.color));
            n.by_prev.insert((e.prev, value, e.color));
        }
        self.elems.get_mut(&value).expect("indexed").place = at;
    }

    fn set_prev(&mut self, value: u64, prev: u64) {
        self.unplace(value);
        self.elems.get_mut(&value).expect("indexed").prev = prev;
        self.place(value);
    }

    fn neighbours(&self, color: Color, value: u64) -> (u64, Option<u64>) {
        let prev = self
            .chains
            .range((color, 0)..(color, value))
            .next_back()
            .map_or(NO_PREV, |x| x.1);
        let next = self
            .chains
            .range((color, value + 1)..=(color, u64::MAX))
            .next()
            .map(|x| x.1);
        (prev, next)
    }

    pub fn insert(&mut self, p: ColoredPoint) -> Result<()> {
        if p.value == 0 {
            return Err(Error::ZeroCoordinate);
        }
        if self.elems.contains_key(&p.value) {
            return Err(Error::DuplicateCoordinate(p.value));
        }
        let leaf = self.route(p.value);
        let elems = &mut self.nodes[leaf as usize].elems;
        let i = elems.partition_point(|&v| v < p.value);
        elems.insert(i, p.value);
        let (prev, next) = self.neighbours(p.color, p.value);
        self.chains.insert((p.color, p.value));
        self.palette = self.palette.max(p.color as usize + 1);
        self.elems.insert(
            p.value,
            Elem {
                color: p.color,
                prev,
                place: NIL,
                leaf,
            },
        );
        self.place(p.value);
        if let Some(n) = next {
            self.set_prev(n, p.value);
        }
        if self.nodes[leaf as usize].elems.len() > LEAF_SPLIT {
            self.split(leaf);
        }
        if self.elems.len() > 2 * self.n0.max(2) {
            self.rebuild();
        }
        Ok(())
    }

    pub fn delete(&mut self, value: u64) -> Result<Color> {
        let e = *self.elems.get(&value).ok_or(Error::NotFound(value))?;
        self.unplace(value);
        let (_, next) = self.neighbours(e.color, value);
        self.chains.remove(&(e.color, value));
        self.elems.remove(&value);
        let leaf = &mut self.nodes[e.leaf as usize].elems;
        let i = leaf.binary_search(&value).expect("leaf holds element");
        leaf.remove(i);
        if let Some(n) = next {
            self.set_prev(n, e.prev);
        }
        if self.elems.len() * 2 < self.n0 {
            self.rebuild();
        }
        Ok(e.color)
    }

    pub fn rebuild(&mut self) {
        let pts = self.points();
        self.load(&pts);
        self.rebuilds += 1;
    }

    /// Splits `v` into two siblings and re-places every element below it.
    /// The root never splits.
    fn split(&mut self, v: u32) {
        let parent = self.nodes[v as usize].parent;
        if parent == NIL {
            return;
        }
        let depth = self.nodes[v as usize].depth;
        let w = self.nodes.len() as u32;
        let mut nw = SNode {
            parent,
            depth,
            leaf: self.nodes[v as usize].leaf,
            ..SNode::default()
        };
        let below: Vec<u64> = self.values_under(v);
        for &x in &below {
            self.unplace(x);
        }
        if nw.leaf {
            let n = &mut self.nodes[v as usize];
            let upper = n.elems.split_off(n.elems.len() / 2);
            nw.lo = upper[0];
            nw.elems = upper;
        } else {
            let n = &mut self.nodes[v as usize];
            let upper = n.children.split_off(n.children.len() / 2);
            nw.lo = self.nodes[upper[0] as usize].lo;
            for &c in &upper {
                self.nodes[c as usize].parent = w;
            }
            nw.children = upper;
        }
        let moved_leaf = nw.leaf;
        let moved: Vec<u64> = nw.elems.clone();
        self.nodes.push(nw);
        if moved_leaf {
            for x in moved {
                self.elems.get_mut(&x).expect("indexed").leaf = w;
            }
        }
        let kids = &mut self.nodes[parent as usize].children;
        let i = kids.iter().position(|&c| c == v).expect("child of parent");
        kids.insert(i + 1, w);
        for &x in &below {
            self.place(x);
        }
        self.node_splits += 1;
        let pd = self.nodes[parent as usize].depth;
        if self.nodes[parent as usize].children.len() > 2 * self.fanout_at(pd) {
            self.split(parent);
        }
    }

    fn values_under(&self, v: u32) -> Vec<u64> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![v];
        while let Some(x) = stack.pop() {
            let n = &self.nodes[x as usize];
            if n.leaf {
                out.extend_from_slice(&n.elems);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    /// Leftmost element of each color in `[a, b]` as `(value, color)`, in no
    /// particular order. With `cap = Some(c)` gives up and returns false as
    /// soon as more than `c` elements have been reported.
    pub fn report(
        &self,
        a: u64,
        b: u64,
        cap: Option<usize>,
        out: &mut Vec<(u64, Color)>,
        meter: &mut CostMeter,
    ) -> bool {
        let limit = cap.unwrap_or(usize::MAX);
        let start = out.len();
        macro_rules! emit {
            ($v:expr, $c:expr) => {{
                if out.len() - start >= limit {
                    return false;
                }
                out.push(($v, $c));
            }};
        }
        if a > b {
            return true;
        }
        meter.locate(2);
        let Some((&first, _)) = self.elems.range(a..=b).next() else {
            return true;
        };
        let (&last, _) = self.elems.range(..=b).next_back().expect("first exists");
        let va = self.elems[&first].leaf;
        let vb = self.elems[&last].leaf;

        if va == vb {
            let n = &self.nodes[va as usize];
            meter.touch(1);
            for &x in &n.elems {
                meter.touch(1);
                if x < a || x > b {
                    continue;
                }
                let e = &self.elems[&x];
                if e.prev < a {
                    emit!(x, e.color);
                }
            }
            return true;
        }

        // Ancestors of va, va first.
        let mut pa = alloc::vec![va];
        while let Some(&top) = pa.last() {
            let p = self.nodes[top as usize].parent;
            if p == NIL {
                break;
            }
            pa.push(p);
        }
        meter.locate(pa.len() as u64);
        let mut pb = alloc::vec![vb];
        let q_idx = loop {
            let x = *pb.last().expect("non-empty");
            if let Some(i) = pa.iter().position(|&y| y == x) {
                break i;
            }
            pb.push(self.nodes[x as usize].parent);
        };
        meter.locate(pb.len() as u64);
        let vq = pa[q_idx];
        let vl = pa[q_idx - 1];
        let vr = pb[pb.len() - 2];

        // Stored elements of every internal node on the path to va.
        for &w in &pa[1..] {
            meter.touch(1);
            for (&x, &(_, c)) in self.nodes[w as usize].by_value.range(a..=b) {
                meter.touch(1);
                emit!(x, c);
            }
        }

        // The leaf va itself.
        meter.touch(1);
        for &x in &self.nodes[va as usize].elems {
            meter.touch(1);
            if x < a || x > b {
                continue;
            }
            let e = &self.elems[&x];
            if e.prev < a && (e.place == va || e.place == NIL) {
                emit!(x, e.color);
            }
        }

        // Right siblings along the path from va up to vl.
        for i in 0..q_idx - 1 {
            let x = pa[i];
            let p = pa[i + 1];
            let kids = &self.nodes[p as usize].children;
            let pos = kids.iter().position(|&c| c == x).expect("child of parent");
            for &s in &kids[pos + 1..] {
                meter.touch(1);
                for &(prev, v, c) in &self.nodes[s as usize].by_prev {
                    meter.touch(1);
                    if prev >= a {
                        break;
                    }
                    emit!(v, c);
                }
            }
        }

        // Children of vq strictly between vl and vr.
        let kids = &self.nodes[vq as usize].children;
        let il = kids.iter().position(|&c| c == vl).expect("child of vq");
        let ir = kids.iter().position(|&c| c == vr).expect("child of vq");
        for &s in &kids[il + 1..ir] {
            meter.touch(1);
            for &(prev, v, c) in &self.nodes[s as usize].by_prev {
                meter.touch(1);
                if prev >= a {
                    break;
                }
                emit!(v, c);
            }
        }

        // vr: elements up to b whose predecessor lies left of a.
        meter.touch(1);
        for (&x, &(prev, c)) in self.nodes[vr as usize].by_value.range(..=b) {
            meter.touch(1);
            if prev < a {
                emit!(x, c);
            }
        }
        true
    }

    /// Leftmost element of each color in `[a, b]`, sorted by value.
    pub fn query_raw(&self, a: u64, b: u64, meter: &mut CostMeter) -> Result<Vec<(u64, Color)>> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let mut out = Vec::new();
        self.report(a, b, None, &mut out, meter);
        out.sort_unstable();
        Ok(out)
    }

    fn has_at_least(&self, a: u64, b: u64, k: usize, meter: &mut CostMeter) -> bool {
        let mut tmp = Vec::new();
        !self.report(a, b, Some(k - 1), &mut tmp, meter)
    }

    /// The `k` leftmost colors of `[a, b]` as `(leftmost element, color)`,
    /// ascending by element.
    pub fn k_leftmost_elems(
        &self,
        a: u64,
        b: u64,
        k: usize,
        meter: &mut CostMeter,
    ) -> Vec<(u64, Color)> {
        if k == 0 || a > b {
            return Vec::new();
        }
        let mut out = Vec::new();
        if !self.report(a, b, Some(k), &mut out, meter) {
            // Smallest b' with at least k colors in [a, b']; each extra
            // element adds at most one color, so [a, b'] has exactly k.
            let (mut lo, mut hi) = (a, b);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if self.has_at_least(a, mid, k, meter) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            out.clear();
            self.report(a, lo, None, &mut out, meter);
        }
        out.sort_unstable();
        out.truncate(k);
        out
    }

    /// The `k` rightmost colors of `[a, b]` as `(rightmost element, color)`,
    /// descending by element.
    pub fn k_rightmost_elems(
        &self,
        a: u64,
        b: u64,
        k: usize,
        meter: &mut CostMeter,
    ) -> Vec<(u64, Color)> {
        if k == 0 || a > b {
            return Vec::new();
        }
        let mut found = Vec::new();
        if !self.report(a, b, Some(k), &mut found, meter) {
            // Largest a' with at least k colors in [a', b].
            let (mut lo, mut hi) = (a, b);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if self.has_at_least(mid, b, k, meter) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            found.clear();
            self.report(lo, b, None, &mut found, meter);
        }
        let mut out: Vec<(u64, Color)> = found
            .into_iter()
            .map(|(_, c)| {
                meter.locate(1);
                let x = self
                    .chains
                    .range((c, 0)..=(c, b))
                    .next_back()
                    .expect("color occurs in range")
                    .1;
                (x, c)
            })
            .collect();
        out.sort_unstable_by(|x, y| y.cmp(x));
        out.truncate(k);
        out
    }

    pub fn k_leftmost(&self, a: u64, b: u64, k: usize) -> Vec<Color> {
        let mut m = CostMeter::default();
        self.k_leftmost_elems(a, b, k, &mut m)
            .into_iter()
            .map(|x| x.1)
            .collect()
    }

    pub fn k_rightmost(&self, a: u64, b: u64, k: usize) -> Vec<Color> {
        let mut m = CostMeter::default();
        self.k_rightmost_elems(a, b, k, &mut m)
            .into_iter()
            .map(|x| x.1)
            .collect()
    }

    /// Children count of every internal node against its depth's target:
    /// `[f/2, 2f]` for nodes with at least `f` elements per child on average.
    pub fn fanout_within_bounds(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            if n.leaf || i as u32 == self.root {
                return true;
            }
            let f = self.fanout_at(n.depth);
            let size = self.values_under(i as u32).len();
            let c = n.children.len();
            c <= 2 * f && (size < f * f || 2 * c >= f)
        }) && {
            let r = &self.nodes[self.root as usize];
            let f = self.fanout_at(0);
            r.leaf || (r.children.len() <= 2 * f + 1 && 2 * r.children.len() + 2 >= f)
        }
    }

    /// Recomputes every placement from scratch (LCA by ancestor lists) and
    /// compares with the stored sets.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        let mut expect: BTreeMap<u32, BTreeSet<u64>> = BTreeMap::new();
        let ancestors = |v: u32| {
            let mut out = alloc::vec![v];
            let mut x = v;
            while self.nodes[x as usize].parent != NIL {
                x = self.nodes[x as usize].parent;
                out.push(x);
            }
            out
        };
        let mut last_color: BTreeMap<Color, u64> = BTreeMap::new();
        for (&v, e) in &self.elems {
            let prev = last_color.insert(e.color, v).unwrap_or(NO_PREV);
            if prev != e.prev {
                return Err("stale prev link");
            }
            if self.route(v) != e.leaf
                || self.nodes[e.leaf as usize].elems.binary_search(&v).is_err()
            {
                return Err("element not in its leaf");
            }
            let at = if prev == NO_PREV {
                self.root
            } else {
                let pl = self.elems[&prev].leaf;
                if pl == e.leaf {
                    NIL
                } else {
                    let ae = ancestors(e.leaf);
                    let ap = ancestors(pl);
                    // First ancestor of e that is also an ancestor of prev.
                    let i = ae.iter().position(|x| ap.contains(x)).expect("common root");
                    ae[i - 1]
                }
            };
            if at != e.place {
                return Err("misplaced element");
            }
            if at != NIL {
                expect.entry(at).or_default().insert(v);
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let want = expect.remove(&(i as u32)).unwrap_or_default();
            let have: BTreeSet<u64> = n.by_value.keys().copied().collect();
            if want != have || n.by_prev.len() != n.by_value.len() {
                return Err("stored set differs from recomputation");
            }
            for (&v, &(p, c)) in &n.by_value {
                if !n.by_prev.contains(&(p, v, c)) {
                    return Err("by-prev view out of sync");
                }
            }
            if !n.leaf {
                let kids = &n.children;
                if kids.is_empty() || self.nodes[kids[0] as usize].lo != n.lo {
                    return Err("first child bound");
                }
                if kids
                    .windows(2)
                    .any(|w| self.nodes[w[0] as usize].lo >= self.nodes[w[1] as usize].lo)
                {
                    return Err("child bounds not increasing");
                }
            }
        }
        Ok(())
    }
}

impl ColorIndex for SlowIndex {
    fn len(&self) -> usize {
        self.elems.len()
    }

    fn palette(&self) -> usize {
        self.palette
    }

    fn query_with(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let mut raw = Vec::new();
        self.report(a, b, None, &mut raw, &mut scratch.meter);
        let mut out: Vec<Color> = raw.into_iter().map(|x| x.1).collect();
        scratch.col.dedup(&mut out);
        Ok(out)
    }
}

impl DynamicColorIndex for SlowIndex {
    fn insert(&mut self, p: ColoredPoint) -> Result<()> {
        SlowIndex::insert(self, p)
    }

    fn delete(&mut self, value: u64) -> Result<Color> {
        SlowIndex::delete(self, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_k_leftmost, oracle_k_rightmost, oracle_report};
    use crate::test_fixtures::sample;
    use crate::types::Range;

    fn colors(s: &SlowIndex, a: u64, b: u64) -> BTreeSet<Color> {
        let mut m = CostMeter::default();
        let raw = s.query_raw(a, b, &mut m).unwrap();
        let set: BTreeSet<Color> = raw.iter().map(|x| x.1).collect();
        assert_eq!(set.len(), raw.len(), "color reported twice in [{a},{b}]");
        set
    }

    #[test]
    fn fanout_targets() {
        assert_eq!(fanouts(1 << 14), [128, 12, 4, 2]);
        assert_eq!(fanouts(0), [2]);
    }

    #[test]
    fn sample_exhaustive() {
        let pts = sample();
        let s = SlowIndex::build(&pts).unwrap();
        s.check_invariants().unwrap();
        for a in 1..=22 {
            for b in a..=22 {
                assert_eq!(
                    colors(&s, a, b),
                    oracle_report(&pts, Range::new(a, b).unwrap())
                );
            }
        }
        assert_eq!(s.k_leftmost(4, 20, 2), [0, 2]);
        assert_eq!(s.k_rightmost(4, 20, 2), [1, 2]);
        assert!(s.k_leftmost(8, 8, 3).is_empty());
    }

    #[test]
    fn placement_rules() {
        // New color: stored at the root.
        let mut s = SlowIndex::build(&[]).unwrap();
        s.insert(ColoredPoint::new(10, 0)).unwrap();
        assert_eq!(s.elems[&10].place, s.root);
        // Same leaf predecessor: stored nowhere.
        s.insert(ColoredPoint::new(11, 0)).unwrap();
        assert_eq!(s.elems[&11].place, NIL);
        s.check_invariants().unwrap();
        assert_eq!(s.delete(10).unwrap(), 0);
        assert_eq!(s.elems[&11].place, s.root);
        assert_eq!(s.delete(10), Err(Error::NotFound(10)));
        assert_eq!(
            s.insert(ColoredPoint::new(11, 1)),
            Err(Error::DuplicateCoordinate(11))
        );
    }

    #[test]
    fn updates_keep_placements() {
        let pts: Vec<_> = (1..=200u64)
            .map(|v| ColoredPoint::new(v * 4, (v % 7) as u32))
            .collect();
        let mut s = SlowIndex::build(&pts).unwrap();
        assert!(s.fanout_within_bounds());
        for v in 1..=150u64 {
            s.insert(ColoredPoint::new(v * 4 + 1, (v % 5) as u32))
                .unwrap();
            s.insert(ColoredPoint::new(v * 4 + 2, (v % 3) as u32))
                .unwrap();
            if v % 10 == 0 {
                s.check_invariants().unwrap();
            }
        }
        assert!(s.node_splits() > 0);
        for v in (1..=200u64).step_by(3) {
            s.delete(v * 4).unwrap();
        }
        s.check_invariants().unwrap();
        let now = s.points();
        for (a, b) in [(1, 900), (5, 9), (100, 400), (397, 401)] {
            assert_eq!(
                colors(&s, a, b),
                oracle_report(&now, Range::new(a, b).unwrap())
            );
        }
    }

    #[test]
    fn k_selection_small() {
        let pts: Vec<_> = (1..=40u64)
            .map(|v| ColoredPoint::new(v, ((v * 7) % 9) as u32))
            .collect();
        let s = SlowIndex::build(&pts).unwrap();
        for a in [1, 5, 17] {
            for b in [a, a + 3, 40] {
                for k in 1..=10 {
                    let r = Range::new(a, b).unwrap();
                    assert_eq!(s.k_leftmost(a, b, k), oracle_k_leftmost(&pts, r, k));
                    assert_eq!(s.k_rightmost(a, b, k), oracle_k_rightmost(&pts, r, k));
                }
            }
        }
    }
}
