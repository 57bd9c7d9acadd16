//! Fully dynamic color index with query cost linear in the answer.
//!
//! Built on the weight-balanced tree of [`crate::wb`]. For an element `e`
//! let `h_min(e)` be one plus the level of the highest node `u` on `e`'s
//! root path where `e` is the leftmost element of its color in `S(u)`, or 0
//! if there is none (`h_max` likewise with rightmost). A query finds the
//! split node `u` of `[a, b]` and, for each child `u_j` the range meets,
//! reports the elements of the child's part of the range with
//! `h_min >= level(u_j) + 1` (with `h_max` for the leftmost child), one per
//! color per child, from two narrow-stripe structures.
//!
//! Only approximations `ĥ <= h` are stored; they are exact for the
//! `ceil(sqrt(n(u)))` smallest elements of every `Min(u)` (largest of
//! `Max(u)`), where `n(u)` counts leaves. A child query returning that many
//! elements proves the answer is large, and the range is then answered by
//! [`SlowIndex`] instead.
//!
//! Each node keeps per-color extremes of its subtree, so exact tags are
//! recomputed by walking a root path. This costs `O(N log N)` space in the
//! worst case and `O(log N)` time per tag.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::{ColorIndex, DynamicColorIndex};
use crate::input::{palette_size, validate_sorted};
use crate::pst::{color_query_slow, Pst, PstPoint};
use crate::slow::SlowIndex;
use crate::stripe::{Stripe, StripePoint};
use crate::types::{ceil_log2, ceil_sqrt, Color, ColoredPoint, CostMeter, QueryScratch, NO_PREV};
use crate::wb::{NodeId, SplitEvent, WbTree};

/// Tuning knobs, mainly so tests can exercise deep trees at small sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DynConfig {
    /// Fixed leaf parameter; default `ceil(log2 n0)^2`.
    pub leaf_param: Option<usize>,
    /// Splits at levels up to this recompute every tag below the split
    /// node; higher ones refresh only the extreme windows. Default
    /// `ceil(log2 log2 n0)`.
    pub low_split_levels: Option<u32>,
}

#[derive(Debug, Clone, Default)]
struct NodeAug {
    min_of: BTreeMap<Color, u64>,
    max_of: BTreeMap<Color, u64>,
    min_set: BTreeSet<u64>,
    max_set: BTreeSet<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Tag {
    color: Color,
    prev: u64,
    hmin: u32,
    hmax: u32,
}

/// How a dynamic query was answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynPath {
    Empty,
    Leaf,
    Stripes,
    /// A child query reached `cap` results; the slow structure answered.
    Fallback {
        cap: usize,
    },
}

/// Update-side counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DynStats {
    pub exact_tag_computations: u64,
    pub low_splits: u64,
    pub high_splits: u64,
    pub rebuilds: u64,
}

#[derive(Debug, Clone)]
pub struct DynIndex {
    tree: WbTree,
    aug: Vec<NodeAug>,
    leaf_pst: Vec<Pst>,
    tags: BTreeMap<u64, Tag>,
    chains: BTreeSet<(Color, u64)>,
    stripe_min: Stripe,
    stripe_max: Stripe,
    slow: SlowIndex,
    config: DynConfig,
    palette: usize,
    stats: DynStats,
}

impl Default for DynIndex {
    fn default() -> Self {
        DynIndex::build(&[]).expect("empty input is valid")
    }
}

impl DynIndex {
    pub fn build(points: &[ColoredPoint]) -> Result<DynIndex> {
        DynIndex::build_with(points, DynConfig::default())
    }

    pub fn build_with(points: &[ColoredPoint], config: DynConfig) -> Result<DynIndex> {
        let palette = palette_size(points);
        validate_sorted(points, palette)?;
        let mut d = DynIndex {
            tree: WbTree::build_with(points, config.leaf_param)?,
            aug: Vec::new(),
            leaf_pst: Vec::new(),
            tags: BTreeMap::new(),
            chains: BTreeSet::new(),
            stripe_min: Stripe::new(0, 1),
            stripe_max: Stripe::new(0, 1),
            slow: SlowIndex::build(points)?,
            config,
            palette,
            stats: DynStats::default(),
        };
        let mut last: BTreeMap<Color, u64> = BTreeMap::new();
        for p in points {
            let prev = last.insert(p.color, p.value).unwrap_or(NO_PREV);
            d.chains.insert((p.color, p.value));
            d.tags.insert(
                p.value,
                Tag {
                    color: p.color,
                    prev,
                    hmin: 0,
                    hmax: 0,
                },
            );
        }
        d.rebuild_aux()?;
        Ok(d)
    }

    pub fn config(&self) -> DynConfig {
        self.config
    }

    pub fn stats(&self) -> DynStats {
        self.stats
    }

    pub fn tree(&self) -> &WbTree {
        &self.tree
    }

    pub fn slow(&self) -> &SlowIndex {
        &self.slow
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn points(&self) -> Vec<ColoredPoint> {
        self.tags
            .iter()
            .map(|(&v, t)| ColoredPoint::new(v, t.color))
            .collect()
    }

    /// Stored `(ĥ_min, ĥ_max)` of `value`.
    pub fn tag(&self, value: u64) -> Option<(u32, u32)> {
        self.tags.get(&value).map(|t| (t.hmin, t.hmax))
    }

    fn low_limit(&self) -> u32 {
        self.config
            .low_split_levels
            .unwrap_or_else(|| ceil_log2(ceil_log2(self.tree.n0() as u64) as u64))
    }

    fn cap(&self, v: NodeId) -> usize {
        ceil_sqrt(self.tree.leaf_count(v) as u64) as usize
    }

    /// Rebuilds node extremes, leaf trees, all tags and both stripes.
    fn rebuild_aux(&mut self) -> Result<()> {
        let slots = self.tree.node_slots();
        self.aug = alloc::vec![NodeAug::default(); slots];
        self.leaf_pst = alloc::vec![Pst::new(); slots];
        let order = self.tree.subtree(self.tree.root());
        for &v in order.iter().rev() {
            self.aug_rebuild(v);
            if self.tree.is_leaf(v) {
                self.leaf_pst_rebuild(v)?;
            }
        }
        for t in self.tags.values_mut() {
            t.hmin = 0;
            t.hmax = 0;
        }
        for &v in &order {
            let h = self.tree.level(v) + 1;
            let aug = &self.aug[v as usize];
            for e in &aug.min_set {
                let t = self.tags.get_mut(e).expect("indexed");
                t.hmin = t.hmin.max(h);
            }
            for e in &aug.max_set {
                let t = self.tags.get_mut(e).expect("indexed");
                t.hmax = t.hmax.max(h);
            }
        }
        let n = self.tags.len();
        let top = self.tree.height() + 1;
        let mins: Vec<StripePoint> = self
            .tags
            .iter()
            .filter(|(_, t)| t.hmin > 0)
            .map(|(&x, t)| StripePoint {
                x,
                y: t.hmin,
                tag: t.color,
            })
            .collect();
        let maxs: Vec<StripePoint> = self
            .tags
            .iter()
            .filter(|(_, t)| t.hmax > 0)
            .map(|(&x, t)| StripePoint {
                x,
                y: t.hmax,
                tag: t.color,
            })
            .collect();
        self.stripe_min = Stripe::build(&mins, n, top)?;
        self.stripe_max = Stripe::build(&maxs, n, top)?;
        Ok(())
    }

    fn ensure_slots(&mut self) {
        let slots = self.tree.node_slots();
        if self.aug.len() < slots {
            self.aug.resize(slots, NodeAug::default());
            self.leaf_pst.resize(slots, Pst::new());
        }
    }

    /// Per-color extremes of `v` from its children (or its points).
    fn aug_rebuild(&mut self, v: NodeId) {
        let mut a = NodeAug::default();
        if self.tree.is_leaf(v) {
            for p in self.tree.leaf_elems(v) {
                a.min_of.entry(p.color).or_insert(p.value);
                a.max_of.insert(p.color, p.value);
            }
        } else {
            for &c in self.tree.children(v) {
                let ca = &self.aug[c as usize];
                for (&col, &x) in &ca.min_of {
                    a.min_of
                        .entry(col)
                        .and_modify(|m| *m = (*m).min(x))
                        .or_insert(x);
                }
                for (&col, &x) in &ca.max_of {
                    a.max_of
                        .entry(col)
                        .and_modify(|m| *m = (*m).max(x))
                        .or_insert(x);
                }
            }
        }
        a.min_set = a.min_of.values().copied().collect();
        a.max_set = a.max_of.values().copied().collect();
        self.aug[v as usize] = a;
    }

    fn leaf_pst_rebuild(&mut self, leaf: NodeId) -> Result<()> {
        let pts: Vec<PstPoint> = self
            .tree
            .leaf_elems(leaf)
            .iter()
            .map(|p| PstPoint {
                x: p.value,
                y: self.tags[&p.value].prev,
                tag: p.color,
            })
            .collect();
        self.leaf_pst[leaf as usize] = Pst::build(pts)?;
        Ok(())
    }

    fn exact_hmin(&mut self, e: u64, color: Color, leaf: NodeId) -> u32 {
        self.stats.exact_tag_computations += 1;
        let mut h = 0;
        for v in self.tree.path_up(leaf) {
            if self.aug[v as usize].min_of.get(&color) != Some(&e) {
                break;
            }
            h = self.tree.level(v) + 1;
        }
        h
    }

    fn exact_hmax(&mut self, e: u64, color: Color, leaf: NodeId) -> u32 {
        self.stats.exact_tag_computations += 1;
        let mut h = 0;
        for v in self.tree.path_up(leaf) {
            if self.aug[v as usize].max_of.get(&color) != Some(&e) {
                break;
            }
            h = self.tree.level(v) + 1;
        }
        h
    }

    fn refresh_min(&mut self, e: u64) -> Result<()> {
        let t = self.tags[&e];
        let leaf = self.tree.route(e);
        let h = self.exact_hmin(e, t.color, leaf);
        if h != t.hmin {
            if t.hmin > 0 {
                self.stripe_min.delete(e)?;
            }
            if h > 0 {
                self.stripe_min.insert(StripePoint {
                    x: e,
                    y: h,
                    tag: t.color,
                })?;
            }
            self.tags.get_mut(&e).expect("indexed").hmin = h;
        }
        Ok(())
    }

    fn refresh_max(&mut self, e: u64) -> Result<()> {
        let t = self.tags[&e];
        let leaf = self.tree.route(e);
        let h = self.exact_hmax(e, t.color, leaf);
        if h != t.hmax {
            if t.hmax > 0 {
                self.stripe_max.delete(e)?;
            }
            if h > 0 {
                self.stripe_max.insert(StripePoint {
                    x: e,
                    y: h,
                    tag: t.color,
                })?;
            }
            self.tags.get_mut(&e).expect("indexed").hmax = h;
        }
        Ok(())
    }

    /// `Left(v)`: the `cap(v)` smallest elements of `Min(v)`.
    pub fn left_window(&self, v: NodeId) -> Vec<u64> {
        self.aug[v as usize]
            .min_set
            .iter()
            .take(self.cap(v))
            .copied()
            .collect()
    }

    /// `Right(v)`: the `cap(v)` largest elements of `Max(v)`, descending.
    pub fn right_window(&self, v: NodeId) -> Vec<u64> {
        self.aug[v as usize]
            .max_set
            .iter()
            .rev()
            .take(self.cap(v))
            .copied()
            .collect()
    }

    fn refresh_windows(&mut self, v: NodeId) -> Result<()> {
        for e in self.left_window(v) {
            self.refresh_min(e)?;
        }
        for e in self.right_window(v) {
            self.refresh_max(e)?;
        }
        Ok(())
    }

    /// Windows of `v` found through k-leftmost / k-rightmost selection on
    /// the slow structure.
    fn refresh_windows_by_selection(&mut self, v: NodeId) -> Result<()> {
        let (lo, hi) = self.tree.span(v);
        let cap = self.cap(v);
        let mut m = CostMeter::default();
        let left = self.slow.k_leftmost_elems(lo, hi, cap, &mut m);
        let right = self.slow.k_rightmost_elems(lo, hi, cap, &mut m);
        debug_assert_eq!(
            left.iter().map(|x| x.0).collect::<Vec<_>>(),
            self.left_window(v)
        );
        debug_assert_eq!(
            right.iter().map(|x| x.0).collect::<Vec<_>>(),
            self.right_window(v)
        );
        for (e, _) in left {
            self.refresh_min(e)?;
        }
        for (e, _) in right {
            self.refresh_max(e)?;
        }
        Ok(())
    }

    pub fn insert(&mut self, p: ColoredPoint) -> Result<()> {
        if p.value == 0 {
            return Err(Error::ZeroCoordinate);
        }
        if self.tags.contains_key(&p.value) {
            return Err(Error::DuplicateCoordinate(p.value));
        }
        let e = p.value;
        let color = p.color;
        let prev = self
            .chains
            .range((color, 0)..(color, e))
            .next_back()
            .map(|x| x.1);
        let next = self
            .chains
            .range((color, e + 1)..=(color, u64::MAX))
            .next()
            .map(|x| x.1);

        let leaf = self.tree.insert_unbalanced(p)?;
        self.ensure_slots();
        for v in self.tree.path_up(leaf) {
            let a = &mut self.aug[v as usize];
            match a.min_of.get(&color) {
                Some(&m) if m < e => {}
                old => {
                    if let Some(&m) = old {
                        a.min_set.remove(&m);
                    }
                    a.min_of.insert(color, e);
                    a.min_set.insert(e);
                }
            }
            match a.max_of.get(&color) {
                Some(&m) if m > e => {}
                old => {
                    if let Some(&m) = old {
                        a.max_set.remove(&m);
                    }
                    a.max_of.insert(color, e);
                    a.max_set.insert(e);
                }
            }
        }
        self.chains.insert((color, e));
        self.palette = self.palette.max(color as usize + 1);
        let prev_v = prev.unwrap_or(NO_PREV);
        self.tags.insert(
            e,
            Tag {
                color,
                prev: prev_v,
                hmin: 0,
                hmax: 0,
            },
        );
        self.leaf_pst[leaf as usize].insert(PstPoint {
            x: e,
            y: prev_v,
            tag: color,
        })?;
        if let Some(n) = next {
            self.relink(n, e)?;
        }
        self.slow.insert(p)?;

        self.refresh_min(e)?;
        self.refresh_max(e)?;
        if let Some(n) = next {
            self.refresh_min(n)?;
        }
        if let Some(q) = prev {
            self.refresh_max(q)?;
        }

        let events = self.tree.split_overfull(leaf);
        self.handle_splits(&events)?;
        if self.tree.needs_rebuild() {
            self.global_rebuild()?;
        }
        Ok(())
    }

    /// Points `value`'s prev-link at `prev` in its leaf tree.
    fn relink(&mut self, value: u64, prev: u64) -> Result<()> {
        let t = self.tags.get_mut(&value).expect("indexed");
        t.prev = prev;
        let color = t.color;
        let leaf = self.tree.route(value);
        let pst = &mut self.leaf_pst[leaf as usize];
        pst.delete(value)?;
        pst.insert(PstPoint {
            x: value,
            y: prev,
            tag: color,
        })
    }

    fn handle_splits(&mut self, events: &[SplitEvent]) -> Result<()> {
        if events.is_empty() {
            return Ok(());
        }
        self.ensure_slots();
        // Extremes first, bottom-up, so exact tags see a consistent tree.
        for ev in events {
            if ev.level == 0 {
                self.leaf_pst_rebuild(ev.left)?;
                self.leaf_pst_rebuild(ev.right)?;
            }
            self.aug_rebuild(ev.left);
            self.aug_rebuild(ev.right);
            if let Some(r) = ev.new_root {
                self.aug_rebuild(r);
            }
        }
        let low = self.low_limit();
        for ev in events {
            if ev.level <= low {
                self.stats.low_splits += 1;
                for side in [ev.left, ev.right] {
                    for p in self.tree.elements_under(side) {
                        self.refresh_min(p.value)?;
                        self.refresh_max(p.value)?;
                    }
                }
            } else {
                self.stats.high_splits += 1;
                self.refresh_windows_by_selection(ev.left)?;
                self.refresh_windows_by_selection(ev.right)?;
                // Tags below can only have grown; restore exactness inside
                // every window of the two halves.
                for side in [ev.left, ev.right] {
                    for v in self.tree.subtree(side) {
                        self.refresh_windows(v)?;
                    }
                }
            }
            if let Some(r) = ev.new_root {
                if ev.level + 1 > low {
                    self.refresh_windows_by_selection(r)?;
                }
            }
        }
        // New leaves widen the windows of every ancestor.
        for ev in events.iter().filter(|e| e.level == 0) {
            for v in self.tree.path_up(ev.left) {
                self.refresh_windows(v)?;
            }
        }
        Ok(())
    }

    pub fn delete(&mut self, value: u64) -> Result<Color> {
        let t = *self.tags.get(&value).ok_or(Error::NotFound(value))?;
        let e = value;
        let color = t.color;
        let prev = self
            .chains
            .range((color, 0)..(color, e))
            .next_back()
            .map(|x| x.1);
        let next = self
            .chains
            .range((color, e + 1)..=(color, u64::MAX))
            .next()
            .map(|x| x.1);
        let leaf = self.tree.route(e);
        let path = self.tree.path_up(leaf);
        let mut lost_min = Vec::new();
        let mut lost_max = Vec::new();
        for &v in &path {
            let (lo, hi) = self.tree.span(v);
            let a = &mut self.aug[v as usize];
            if a.min_of.get(&color) == Some(&e) {
                a.min_set.remove(&e);
                match next.filter(|&n| n <= hi) {
                    Some(n) => {
                        a.min_of.insert(color, n);
                        a.min_set.insert(n);
                    }
                    None => {
                        a.min_of.remove(&color);
                    }
                }
                lost_min.push(v);
            }
            if a.max_of.get(&color) == Some(&e) {
                a.max_set.remove(&e);
                match prev.filter(|&q| q >= lo) {
                    Some(q) => {
                        a.max_of.insert(color, q);
                        a.max_set.insert(q);
                    }
                    None => {
                        a.max_of.remove(&color);
                    }
                }
                lost_max.push(v);
            }
        }
        self.tree.delete_lazy(e)?;
        self.chains.remove(&(color, e));
        if t.hmin > 0 {
            self.stripe_min.delete(e)?;
        }
        if t.hmax > 0 {
            self.stripe_max.delete(e)?;
        }
        self.tags.remove(&e);
        self.leaf_pst[leaf as usize].delete(e)?;
        if let Some(n) = next {
            self.relink(n, t.prev)?;
        }
        self.slow.delete(e)?;

        if let Some(n) = next {
            self.refresh_min(n)?;
        }
        if let Some(q) = prev {
            self.refresh_max(q)?;
        }
        // An element may have slid into a window from just outside it.
        for v in lost_min {
            let cap = self.cap(v);
            if let Some(&x) = self.aug[v as usize].min_set.iter().nth(cap - 1) {
                self.refresh_min(x)?;
            }
        }
        for v in lost_max {
            let cap = self.cap(v);
            if let Some(&x) = self.aug[v as usize].max_set.iter().rev().nth(cap - 1) {
                self.refresh_max(x)?;
            }
        }
        if self.tree.needs_rebuild() {
            self.global_rebuild()?;
        }
        Ok(color)
    }

    fn global_rebuild(&mut self) -> Result<()> {
        self.tree.rebuild();
        self.stats.rebuilds += 1;
        self.rebuild_aux()
    }

    /// Query that also reports which branch produced the answer.
    pub fn query_traced(
        &self,
        a: u64,
        b: u64,
        scratch: &mut QueryScratch,
    ) -> Result<(Vec<Color>, DynPath)> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let meter = &mut scratch.meter;
        meter.locate(ceil_log2(self.tags.len() as u64 + 1) as u64);
        let Some((&e, _)) = self.tags.range(a..=b).next() else {
            return Ok((Vec::new(), DynPath::Empty));
        };
        meter.locate(self.tree.height() as u64 + 1);
        let leaf = self.tree.route(e);
        let mut out = Vec::new();
        let Some(u) = self.tree.hra_query(leaf, a, b, meter) else {
            color_query_slow(&self.leaf_pst[leaf as usize], a, b, &mut out, meter);
            return Ok((out, DynPath::Leaf));
        };
        let subs = self.tree.child_subranges(u, a, b);
        let kids = self.tree.children(u);
        let first = subs[0].0;
        let mut pts = Vec::new();
        for &(j, aj, bj) in &subs {
            let child = kids[j];
            let cap = self.cap(child);
            let thr = self.tree.level(child) + 1;
            let stripe = if j == first {
                &self.stripe_max
            } else {
                &self.stripe_min
            };
            pts.clear();
            if !stripe.query_into(aj, bj, thr, cap - 1, &mut pts, meter) {
                let mut raw = Vec::new();
                self.slow.report(a, b, None, &mut raw, meter);
                return Ok((
                    raw.into_iter().map(|x| x.1).collect(),
                    DynPath::Fallback { cap },
                ));
            }
            out.extend(pts.iter().map(|p| p.tag));
        }
        meter.touch(out.len() as u64);
        scratch.col.dedup(&mut out);
        Ok((out, DynPath::Stripes))
    }

    /// Heights recomputed from the color chains and node spans alone:
    /// `e` is leftmost of its color in `S(v)` iff its predecessor is below
    /// the span of `v`.
    pub fn brute_heights(&self, e: u64) -> Option<(u32, u32)> {
        let t = self.tags.get(&e)?;
        let next = self
            .chains
            .range((t.color, e + 1)..=(t.color, u64::MAX))
            .next()
            .map(|x| x.1);
        let leaf = self.tree.route(e);
        let (mut hmin, mut hmax) = (0, 0);
        let (mut in_min, mut in_max) = (true, true);
        for v in self.tree.path_up(leaf) {
            let (lo, hi) = self.tree.span(v);
            in_min &= t.prev == NO_PREV || t.prev < lo;
            in_max &= next.is_none_or(|n| n > hi);
            if in_min {
                hmin = self.tree.level(v) + 1;
            }
            if in_max {
                hmax = self.tree.level(v) + 1;
            }
        }
        Some((hmin, hmax))
    }

    /// Tag soundness for `e`: stored tags never exceed the true heights,
    /// and match them when `e` sits in the window of the highest node where
    /// it is extreme.
    pub fn check_tag(&self, e: u64) -> core::result::Result<(), &'static str> {
        let (hmin, hmax) = self.brute_heights(e).ok_or("unknown element")?;
        let t = &self.tags[&e];
        if t.hmin > hmin || t.hmax > hmax {
            return Err("stored height above true height");
        }
        let path = self.tree.path_up(self.tree.route(e));
        if hmin > 0 {
            let top = path[hmin as usize - 1];
            if self.left_window(top).contains(&e) && t.hmin != hmin {
                return Err("inexact min height inside a window");
            }
        }
        if hmax > 0 {
            let top = path[hmax as usize - 1];
            if self.right_window(top).contains(&e) && t.hmax != hmax {
                return Err("inexact max height inside a window");
            }
        }
        for v in &path {
            if self.left_window(*v).contains(&e) && t.hmin != hmin {
                return Err("inexact min height inside a lower window");
            }
            if self.right_window(*v).contains(&e) && t.hmax != hmax {
                return Err("inexact max height inside a lower window");
            }
        }
        Ok(())
    }

    /// Weight bounds and keys along the root path of `value`'s leaf, and
    /// that leaf's three-sided tree.
    pub fn check_path(&self, value: u64) -> core::result::Result<(), &'static str> {
        let leaf = self.tree.route(value);
        let p = self.tree.leaf_param();
        let root = self.tree.root();
        for v in self.tree.path_up(leaf) {
            if v == root {
                continue;
            }
            let w = self.tree.weight(v);
            let target = 8usize.pow(self.tree.level(v)) * p;
            if w > 2 * target || 2 * w < target {
                return Err("weight bound violated on update path");
            }
        }
        let (k1, k2) = self.tree.leaf_keys(leaf);
        if k1.windows(2).any(|w| w[0] < w[1]) || k2.windows(2).any(|w| w[0] > w[1]) {
            return Err("ancestor keys not monotone");
        }
        self.leaf_pst[leaf as usize].check_invariants()
    }

    /// Full audit: tree, extremes against a recomputation, tags, leaf
    /// trees, stripes and the slow structure.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        self.tree.check_invariants()?;
        for v in self.tree.subtree(self.tree.root()) {
            let mut min_of: BTreeMap<Color, u64> = BTreeMap::new();
            let mut max_of: BTreeMap<Color, u64> = BTreeMap::new();
            for p in self.tree.elements_under(v) {
                min_of.entry(p.color).or_insert(p.value);
                max_of.insert(p.color, p.value);
            }
            let a = &self.aug[v as usize];
            if a.min_of != min_of || a.max_of != max_of {
                return Err("node extremes differ from recomputation");
            }
            if a.min_set.len() != a.min_of.len() || a.max_set.len() != a.max_of.len() {
                return Err("extreme sets out of sync");
            }
            if self.tree.is_leaf(v) {
                let pst = &self.leaf_pst[v as usize];
                if pst.len() != self.tree.leaf_elems(v).len() {
                    return Err("leaf tree size");
                }
                for q in self.tree.leaf_elems(v) {
                    if pst.get(q.value).map(|x| x.y) != Some(self.tags[&q.value].prev) {
                        return Err("leaf tree prev link");
                    }
                }
                pst.check_invariants()?;
            }
        }
        for &e in self.tags.keys() {
            self.check_tag(e)?;
            let t = &self.tags[&e];
            if self.stripe_min.get(e).map_or(0, |p| p.y) != t.hmin
                || self.stripe_max.get(e).map_or(0, |p| p.y) != t.hmax
            {
                return Err("stripe out of sync with tags");
            }
        }
        if self.stripe_min.len() != self.tags.values().filter(|t| t.hmin > 0).count() {
            return Err("stripe holds stale points");
        }
        self.stripe_min.check_invariants()?;
        self.stripe_max.check_invariants()?;
        self.slow.check_invariants()?;
        Ok(())
    }

    /// Total entries of the per-node extreme sets.
    pub fn extreme_entries(&self) -> usize {
        self.tree
            .subtree(self.tree.root())
            .into_iter()
            .map(|v| self.aug[v as usize].min_set.len() + self.aug[v as usize].max_set.len())
            .sum()
    }
}

impl ColorIndex for DynIndex {
    fn len(&self) -> usize {
        self.tags.len()
    }

    fn palette(&self) -> usize {
        self.palette
    }

    fn query_with(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>> {
        self.query_traced(a, b, scratch).map(|x| x.0)
    }
}

impl DynamicColorIndex for DynIndex {
    fn insert(&mut self, p: ColoredPoint) -> Result<()> {
        DynIndex::insert(self, p)
    }

    fn delete(&mut self, value: u64) -> Result<Color> {
        DynIndex::delete(self, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_report;
    use crate::test_fixtures::sample;
    use crate::types::Range;

    fn set(v: Vec<Color>) -> BTreeSet<Color> {
        v.into_iter().collect()
    }

    fn small() -> DynConfig {
        DynConfig {
            leaf_param: Some(2),
            low_split_levels: Some(0),
        }
    }

    #[test]
    fn sample_by_insertion() {
        for cfg in [DynConfig::default(), small()] {
            let mut d = DynIndex::build_with(&[], cfg).unwrap();
            for p in sample() {
                d.insert(p).unwrap();
                d.check_invariants().unwrap();
            }
            for a in 1..=22 {
                for b in a..=22 {
                    let want = oracle_report(&sample(), Range::new(a, b).unwrap());
                    assert_eq!(set(d.query(a, b).unwrap()), want, "[{a},{b}]");
                }
            }
        }
    }

    #[test]
    fn sole_element_is_extreme_everywhere() {
        let mut d = DynIndex::build_with(&[], small()).unwrap();
        for v in 1..=30u64 {
            d.insert(ColoredPoint::new(v * 2, 0)).unwrap();
        }
        d.insert(ColoredPoint::new(31, 7)).unwrap();
        let top = d.tree().height() + 1;
        assert_eq!(d.tag(31), Some((top, top)));
        assert_eq!(d.brute_heights(31), Some((top, top)));
    }

    #[test]
    fn delete_and_reinsert_restores_tags() {
        let pts: Vec<_> = (1..=120u64)
            .map(|v| ColoredPoint::new(v, (v % 6) as u32))
            .collect();
        let mut d = DynIndex::build_with(&pts, small()).unwrap();
        d.check_invariants().unwrap();
        let before: Vec<_> = pts.iter().map(|p| d.tag(p.value)).collect();
        let c = d.delete(50).unwrap();
        d.check_invariants().unwrap();
        d.insert(ColoredPoint::new(50, c)).unwrap();
        let after: Vec<_> = pts.iter().map(|p| d.tag(p.value)).collect();
        assert_eq!(before, after);
        assert_eq!(d.delete(1000), Err(Error::NotFound(1000)));
        assert_eq!(
            d.insert(ColoredPoint::new(50, 1)),
            Err(Error::DuplicateCoordinate(50))
        );
    }

    #[test]
    fn empty_and_leaf_ranges() {
        let d = DynIndex::build(&sample()).unwrap();
        let mut s = QueryScratch::new(3);
        assert_eq!(d.query_traced(6, 6, &mut s).unwrap().1, DynPath::Empty);
        assert_eq!(d.query_traced(1, 3, &mut s).unwrap().1, DynPath::Leaf);
    }

    #[test]
    fn high_level_splits_keep_windows_exact() {
        let mut d = DynIndex::build_with(&[], small()).unwrap();
        for v in 1..=400u64 {
            d.insert(ColoredPoint::new((v * 37) % 1009 + 1, (v % 11) as u32))
                .unwrap();
        }
        assert!(d.stats().high_splits > 0);
        d.check_invariants().unwrap();
        let pts = d.points();
        for (a, b) in [(1, 1010), (100, 200), (500, 520), (3, 4)] {
            assert_eq!(
                set(d.query(a, b).unwrap()),
                oracle_report(&pts, Range::new(a, b).unwrap())
            );
        }
    }
}
