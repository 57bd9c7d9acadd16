//! Weight-balanced B-tree with branching parameter 8 over colored points.
//!
//! A level-`ℓ` node holds between `½·8^ℓ·P` and `2·8^ℓ·P` elements, where
//! the leaf parameter `P` is `ceil(log2 n0)^2` for the size `n0` at the last
//! global rebuild. Child `i >= 1` of a node is entered through its middle
//! value `m_i`: the node's smallest element in that child when the child was
//! created. Deletions are lazy: a deleted value stays in its leaf as a marker,
//! so a node's weight is live elements plus markers, splits divide both, and
//! the whole tree is rebuilt after `n0 / 2` deletions or once it doubles.
//!
//! Each leaf keeps the left and right middle values of its ancestors in
//! height order, so the highest ancestor with a middle value inside a query
//! range is found with two binary searches.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{ceil_log2, Color, ColoredPoint, CostMeter};

const NIL: u32 = u32::MAX;
const BRANCH: usize = 8;

pub type NodeId = u32;

/// Ancestor middle values by height, with the ancestor id.
type KeyList = Vec<(u64, u32)>;

#[derive(Debug, Clone, Default)]
struct WbNode {
    parent: u32,
    level: u32,
    /// Smallest and largest value routed to this node.
    lo: u64,
    hi: u64,
    children: Vec<u32>,
    /// `mids[i]` routes into `children[i]`; `mids[0] == lo`.
    mids: Vec<u64>,
    elems: Vec<ColoredPoint>,
    /// Leaf only: sorted values deleted since the last rebuild.
    dead: Vec<u64>,
    live: usize,
    ghosts: usize,
    leaves: usize,
    /// Per leaf: the largest left value and smallest right value of each
    /// ancestor, by height, with the ancestor id.
    k1: KeyList,
    k2: KeyList,
    alive: bool,
}

/// One node split performed during an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitEvent {
    pub level: u32,
    /// The split node; keeps the lower half.
    pub left: NodeId,
    /// Newly created node with the upper half.
    pub right: NodeId,
    /// Set when the root split and a new root was created above it.
    pub new_root: Option<NodeId>,
}

/// What an insert or delete did to the shape of the tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub leaf: NodeId,
    pub splits: Vec<SplitEvent>,
    pub rebuilt: bool,
}

#[derive(Debug, Clone)]
pub struct WbTree {
    nodes: Vec<WbNode>,
    free: Vec<u32>,
    root: u32,
    leaf_param: usize,
    fixed_leaf_param: Option<usize>,
    n0: usize,
    live: usize,
    deletions: usize,
    inserts: u64,
    rebuilds: u64,
    splits: Vec<u64>,
    initial_nodes: Vec<u64>,
}

/// `ceil(log2 n)^2`, at least 1.
pub fn default_leaf_param(n: usize) -> usize {
    let l = ceil_log2(n as u64) as usize;
    (l * l).max(1)
}

impl WbTree {
    pub fn build(points: &[ColoredPoint]) -> Result<WbTree> {
        WbTree::build_with(points, None)
    }

    /// Builds with a fixed leaf parameter instead of `ceil(log2 n0)^2`.
    pub fn build_with(points: &[ColoredPoint], leaf_param: Option<usize>) -> Result<WbTree> {
        if let Some(w) = points.windows(2).find(|w| w[0].value >= w[1].value) {
            return Err(if w[0].value == w[1].value {
                Error::DuplicateCoordinate(w[0].value)
            } else {
                Error::InvalidParameter("points not sorted by value")
            });
        }
        if points.first().is_some_and(|p| p.value == 0) {
            return Err(Error::ZeroCoordinate);
        }
        if leaf_param == Some(0) {
            return Err(Error::InvalidParameter("leaf parameter must be positive"));
        }
        let mut t = WbTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            leaf_param: 1,
            fixed_leaf_param: leaf_param,
            n0: 0,
            live: 0,
            deletions: 0,
            inserts: 0,
            rebuilds: 0,
            splits: Vec::new(),
            initial_nodes: Vec::new(),
        };
        t.bulk(points);
        Ok(t)
    }

    fn bulk(&mut self, points: &[ColoredPoint]) {
        let n = points.len();
        self.nodes.clear();
        self.free.clear();
        self.n0 = n;
        self.live = n;
        self.deletions = 0;
        self.leaf_param = self
            .fixed_leaf_param
            .unwrap_or_else(|| default_leaf_param(n));
        let p = self.leaf_param;

        // Leaves of P points; a short tail joins its neighbour.
        let mut bounds: Vec<(usize, usize)> = Vec::new();
        let mut s = 0;
        while s < n {
            let e = (s + p).min(n);
            bounds.push((s, e));
            s = e;
        }
        if bounds.len() >= 2 {
            let (ls, le) = bounds[bounds.len() - 1];
            if (le - ls) * 2 < p {
                bounds.pop();
                bounds.last_mut().expect("two chunks").1 = le;
            }
        }
        if bounds.is_empty() {
            bounds.push((0, 0));
        }
        let mut level_nodes: Vec<u32> = bounds
            .iter()
            .map(|&(s, e)| {
                let id = self.alloc();
                let node = &mut self.nodes[id as usize];
                node.elems = points[s..e].to_vec();
                node.live = e - s;
                node.leaves = 1;
                node.lo = if s == 0 { 0 } else { points[s].value };
                id
            })
            .collect();

        let mut level = 0u32;
        while level_nodes.len() > 1 {
            level += 1;
            let target = self.level_weight(level);
            let mut groups: Vec<Vec<u32>> = Vec::new();
            let mut cur: Vec<u32> = Vec::new();
            let mut w = 0usize;
            for &c in &level_nodes {
                cur.push(c);
                w += self.weight(c);
                if w >= target {
                    groups.push(core::mem::take(&mut cur));
                    w = 0;
                }
            }
            if !cur.is_empty() {
                if (w * 2 < target || cur.len() < 2) && !groups.is_empty() {
                    groups.last_mut().expect("non-empty").extend(cur);
                } else {
                    groups.push(cur);
                }
            }
            level_nodes = groups
                .into_iter()
                .map(|kids| {
                    let id = self.alloc();
                    self.adopt(id, level, kids);
                    id
                })
                .collect();
        }
        self.root = level_nodes[0];
        let root = self.root as usize;
        self.nodes[root].parent = NIL;
        self.nodes[root].lo = 0;
        self.nodes[root].hi = u64::MAX;
        self.fix_spans(self.root);
        let top = self.nodes[root].level as usize;
        self.splits = alloc::vec![0; top + 1];
        self.initial_nodes = alloc::vec![0; top + 1];
        for v in 0..self.nodes.len() {
            if self.nodes[v].alive {
                self.initial_nodes[self.nodes[v].level as usize] += 1;
            }
        }
        self.refresh_paths(self.root);
    }

    fn alloc(&mut self) -> u32 {
        let node = WbNode {
            parent: NIL,
            alive: true,
            ..WbNode::default()
        };
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = node;
            id
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    /// Makes `kids` the children of internal node `id` at `level`.
    fn adopt(&mut self, id: u32, level: u32, kids: Vec<u32>) {
        let mut live = 0;
        let mut ghosts = 0;
        let mut leaves = 0;
        let mut mids = Vec::with_capacity(kids.len());
        for &k in &kids {
            let c = &mut self.nodes[k as usize];
            c.parent = id;
            live += c.live;
            ghosts += c.ghosts;
            leaves += c.leaves;
            mids.push(c.lo);
        }
        let node = &mut self.nodes[id as usize];
        node.level = level;
        node.lo = mids[0];
        node.children = kids;
        node.mids = mids;
        node.live = live;
        node.ghosts = ghosts;
        node.leaves = leaves;
        node.elems.clear();
        node.dead.clear();
    }

    /// Recomputes `lo`/`hi` of the subtree below `v` from middle values.
    fn fix_spans(&mut self, v: u32) {
        let (hi, kids, mids) = {
            let n = &self.nodes[v as usize];
            (n.hi, n.children.clone(), n.mids.clone())
        };
        for (i, &c) in kids.iter().enumerate() {
            let c_hi = if i + 1 < kids.len() {
                mids[i + 1] - 1
            } else {
                hi
            };
            let node = &mut self.nodes[c as usize];
            node.lo = mids[i];
            node.hi = c_hi;
            self.fix_spans(c);
        }
    }

    fn level_weight(&self, level: u32) -> usize {
        BRANCH.saturating_pow(level).saturating_mul(self.leaf_param)
    }

    /// Nominal weight: live elements plus deletions not yet rebuilt away.
    pub fn weight(&self, v: NodeId) -> usize {
        let n = &self.nodes[v as usize];
        n.live + n.ghosts
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn leaf_param(&self) -> usize {
        self.leaf_param
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn inserts(&self) -> u64 {
        self.inserts
    }

    /// Splits performed at each level since the last rebuild.
    pub fn splits_per_level(&self) -> &[u64] {
        &self.splits
    }

    /// Nodes per level right after the last rebuild.
    pub fn initial_nodes_per_level(&self) -> &[u64] {
        &self.initial_nodes
    }

    pub fn level(&self, v: NodeId) -> u32 {
        self.nodes[v as usize].level
    }

    pub fn height(&self) -> u32 {
        self.level(self.root)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v as usize].level == 0
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.nodes[v as usize].parent;
        (p != NIL).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v as usize].children
    }

    /// Middle values; entry 0 is the node's own lower bound.
    pub fn mids(&self, v: NodeId) -> &[u64] {
        &self.nodes[v as usize].mids
    }

    /// Inclusive value interval routed to `v`.
    pub fn span(&self, v: NodeId) -> (u64, u64) {
        let n = &self.nodes[v as usize];
        (n.lo, n.hi)
    }

    pub fn leaf_count(&self, v: NodeId) -> usize {
        self.nodes[v as usize].leaves
    }

    pub fn live(&self, v: NodeId) -> usize {
        self.nodes[v as usize].live
    }

    /// Points stored in leaf `v`, ascending.
    pub fn leaf_elems(&self, v: NodeId) -> &[ColoredPoint] {
        &self.nodes[v as usize].elems
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.nodes.get(v as usize).is_some_and(|n| n.alive)
    }

    /// Capacity of the node arena (ids are below this).
    pub fn node_slots(&self) -> usize {
        self.nodes.len()
    }

    /// Leaves below `v`, left to right.
    pub fn leaves_under(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![v];
        while let Some(x) = stack.pop() {
            let n = &self.nodes[x as usize];
            if n.level == 0 {
                out.push(x);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    /// All nodes below and including `v`.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x as usize].children.iter().rev());
        }
        out
    }

    /// Live points below `v`, ascending.
    pub fn elements_under(&self, v: NodeId) -> Vec<ColoredPoint> {
        self.leaves_under(v)
            .into_iter()
            .flat_map(|l| self.nodes[l as usize].elems.iter().copied())
            .collect()
    }

    pub fn elements(&self) -> Vec<ColoredPoint> {
        self.elements_under(self.root)
    }

    /// Index of the child of `v` that `value` routes to.
    pub fn route_child(&self, v: NodeId, value: u64) -> usize {
        let mids = &self.nodes[v as usize].mids;
        mids.partition_point(|&m| m <= value).saturating_sub(1)
    }

    /// Leaf that `value` routes to.
    pub fn route(&self, value: u64) -> NodeId {
        let mut v = self.root;
        while self.nodes[v as usize].level > 0 {
            let i = self.route_child(v, value);
            v = self.nodes[v as usize].children[i];
        }
        v
    }

    /// Path from `v` up to the root, `v` first.
    pub fn path_up(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = alloc::vec![v];
        let mut x = v;
        while let Some(p) = self.parent(x) {
            out.push(p);
            x = p;
        }
        out
    }

    pub fn find(&self, value: u64) -> Option<(NodeId, Color)> {
        let leaf = self.route(value);
        let elems = &self.nodes[leaf as usize].elems;
        let i = elems.binary_search_by_key(&value, |p| p.value).ok()?;
        Some((leaf, elems[i].color))
    }

    /// Places `p` in its leaf without rebalancing.
    pub fn insert_unbalanced(&mut self, p: ColoredPoint) -> Result<NodeId> {
        if p.value == 0 {
            return Err(Error::ZeroCoordinate);
        }
        let leaf = self.route(p.value);
        let node = &mut self.nodes[leaf as usize];
        match node.elems.binary_search_by_key(&p.value, |q| q.value) {
            Ok(_) => return Err(Error::DuplicateCoordinate(p.value)),
            Err(i) => node.elems.insert(i, p),
        }
        // Reinserting a deleted value takes its marker's place.
        let revived = match node.dead.binary_search(&p.value) {
            Ok(i) => {
                node.dead.remove(i);
                true
            }
            Err(_) => false,
        };
        for v in self.path_up(leaf) {
            let n = &mut self.nodes[v as usize];
            n.live += 1;
            if revived {
                n.ghosts -= 1;
            }
        }
        self.live += 1;
        self.inserts += 1;
        Ok(leaf)
    }

    /// Removes `value` from its leaf; middle values stay as they are.
    pub fn delete_lazy(&mut self, value: u64) -> Result<(NodeId, Color)> {
        let leaf = self.route(value);
        let node = &mut self.nodes[leaf as usize];
        let i = node
            .elems
            .binary_search_by_key(&value, |q| q.value)
            .map_err(|_| Error::NotFound(value))?;
        let color = node.elems.remove(i).color;
        let j = node.dead.binary_search(&value).unwrap_err();
        node.dead.insert(j, value);
        for v in self.path_up(leaf) {
            let n = &mut self.nodes[v as usize];
            n.live -= 1;
            n.ghosts += 1;
        }
        self.live -= 1;
        self.deletions += 1;
        Ok((leaf, color))
    }

    /// True once deletions reach `n0 / 2` or the size has doubled.
    pub fn needs_rebuild(&self) -> bool {
        (self.deletions > 0 && self.deletions * 2 >= self.n0) || self.live > 2 * self.n0
    }

    /// Rebuilds the whole tree from the live elements.
    pub fn rebuild(&mut self) {
        let pts = self.elements();
        self.bulk(&pts);
        self.rebuilds += 1;
    }

    /// Insert followed by splits and, when due, a global rebuild.
    pub fn insert(&mut self, p: ColoredPoint) -> Result<UpdateOutcome> {
        let leaf = self.insert_unbalanced(p)?;
        let splits = self.split_overfull(leaf);
        let mut out = UpdateOutcome {
            leaf,
            splits,
            rebuilt: false,
        };
        if self.needs_rebuild() {
            self.rebuild();
            out.rebuilt = true;
        }
        Ok(out)
    }

    pub fn delete(&mut self, value: u64) -> Result<(Color, UpdateOutcome)> {
        let (leaf, color) = self.delete_lazy(value)?;
        let mut out = UpdateOutcome {
            leaf,
            ..UpdateOutcome::default()
        };
        if self.needs_rebuild() {
            self.rebuild();
            out.rebuilt = true;
        }
        Ok((color, out))
    }

    fn overfull(&self, v: u32) -> bool {
        let n = &self.nodes[v as usize];
        self.weight(v) > 2 * self.level_weight(n.level) && (n.level == 0 || n.children.len() >= 2)
    }

    /// Splits every overweight node on the path from `leaf` to the root,
    /// bottom-up, and refreshes the ancestor keys of affected leaves.
    pub fn split_overfull(&mut self, leaf: NodeId) -> Vec<SplitEvent> {
        let mut events = Vec::new();
        let mut v = leaf;
        let mut top: Option<u32> = None;
        loop {
            if self.overfull(v) {
                let ev = self.split(v);
                top = Some(ev.new_root.unwrap_or_else(|| self.nodes[v as usize].parent));
                events.push(ev);
            }
            match self.parent(v) {
                Some(p) => v = p,
                None => break,
            }
        }
        if let Some(t) = top {
            self.refresh_paths(t);
        }
        events
    }

    fn split(&mut self, v: u32) -> SplitEvent {
        let level = self.nodes[v as usize].level;
        let w = self.alloc();
        if level == 0 {
            // Split at the median of live values and markers together.
            let node = &mut self.nodes[v as usize];
            let mut all: Vec<u64> = node.elems.iter().map(|p| p.value).collect();
            all.extend_from_slice(&node.dead);
            all.sort_unstable();
            let lo = all[all.len() / 2];
            let upper = node
                .elems
                .split_off(node.elems.partition_point(|p| p.value < lo));
            let upper_dead = node.dead.split_off(node.dead.partition_point(|&x| x < lo));
            node.live = node.elems.len();
            node.ghosts = node.dead.len();
            let hi = node.hi;
            node.hi = lo - 1;
            let nw = &mut self.nodes[w as usize];
            nw.live = upper.len();
            nw.elems = upper;
            nw.ghosts = upper_dead.len();
            nw.dead = upper_dead;
            nw.leaves = 1;
            nw.lo = lo;
            nw.hi = hi;
        } else {
            let half = self.weight(v).div_ceil(2);
            let kids = self.nodes[v as usize].children.clone();
            let mut acc = 0;
            let mut t = kids.len() - 1;
            for (i, &c) in kids.iter().enumerate() {
                acc += self.weight(c);
                if acc >= half {
                    t = i + 1;
                    break;
                }
            }
            let t = t.clamp(1, kids.len() - 1);
            let hi = self.nodes[v as usize].hi;
            let lower = kids[..t].to_vec();
            let upper = kids[t..].to_vec();
            self.adopt(v, level, lower);
            self.adopt(w, level, upper);
            let lo = self.nodes[w as usize].lo;
            self.nodes[v as usize].hi = lo - 1;
            self.nodes[w as usize].hi = hi;
        }
        self.nodes[w as usize].level = level;
        if self.splits.len() <= level as usize + 1 {
            self.splits.resize(level as usize + 2, 0);
            self.initial_nodes.resize(level as usize + 2, 0);
        }
        self.splits[level as usize] += 1;

        let parent = self.nodes[v as usize].parent;
        if parent == NIL {
            let r = self.alloc();
            self.adopt(r, level + 1, alloc::vec![v, w]);
            self.nodes[r as usize].hi = u64::MAX;
            self.nodes[r as usize].lo = 0;
            self.root = r;
            SplitEvent {
                level,
                left: v,
                right: w,
                new_root: Some(r),
            }
        } else {
            self.nodes[w as usize].parent = parent;
            let lo = self.nodes[w as usize].lo;
            let p = &mut self.nodes[parent as usize];
            let i = p
                .children
                .iter()
                .position(|&c| c == v)
                .expect("child of parent");
            p.children.insert(i + 1, w);
            p.mids.insert(i + 1, lo);
            for a in self.path_up(parent) {
                self.nodes[a as usize].leaves = self.recount_leaves(a);
            }
            SplitEvent {
                level,
                left: v,
                right: w,
                new_root: None,
            }
        }
    }

    fn recount_leaves(&self, v: u32) -> usize {
        let n = &self.nodes[v as usize];
        if n.level == 0 {
            1
        } else {
            n.children
                .iter()
                .map(|&c| self.nodes[c as usize].leaves)
                .sum()
        }
    }

    /// Recomputes the ancestor keys of every leaf below `v`.
    fn refresh_paths(&mut self, v: u32) {
        for leaf in self.leaves_under(v) {
            let (k1, k2) = self.compute_keys(leaf);
            let n = &mut self.nodes[leaf as usize];
            n.k1 = k1;
            n.k2 = k2;
        }
    }

    fn compute_keys(&self, leaf: u32) -> (KeyList, KeyList) {
        let mut k1 = Vec::new();
        let mut k2 = Vec::new();
        let mut child = leaf;
        while let Some(u) = self.parent(child) {
            let n = &self.nodes[u as usize];
            let i = n
                .children
                .iter()
                .position(|&c| c == child)
                .expect("child of parent");
            if i >= 1 {
                k1.push((n.mids[i], u));
            }
            if i + 1 < n.mids.len() {
                k2.push((n.mids[i + 1], u));
            }
            child = u;
        }
        (k1, k2)
    }

    /// Left and right keys of `leaf`, by height.
    pub fn leaf_keys(&self, leaf: NodeId) -> (Vec<u64>, Vec<u64>) {
        let n = &self.nodes[leaf as usize];
        (
            n.k1.iter().map(|k| k.0).collect(),
            n.k2.iter().map(|k| k.0).collect(),
        )
    }

    /// Highest ancestor `u` of `leaf` with `a < m_i(u) <= b` for some
    /// `i >= 1`. Requires `leaf` to hold an element of `[a, b]`.
    pub fn hra_query(&self, leaf: NodeId, a: u64, b: u64, meter: &mut CostMeter) -> Option<NodeId> {
        let n = &self.nodes[leaf as usize];
        meter.locate(
            ceil_log2(n.k1.len() as u64 + 1) as u64 + ceil_log2(n.k2.len() as u64 + 1) as u64,
        );
        // Left values shrink with height, right values grow.
        let i1 = n.k1.partition_point(|&(m, _)| m > a);
        let i2 = n.k2.partition_point(|&(m, _)| m <= b);
        let u1 = (i1 > 0).then(|| n.k1[i1 - 1].1);
        let u2 = (i2 > 0).then(|| n.k2[i2 - 1].1);
        match (u1, u2) {
            (Some(x), Some(y)) => Some(if self.level(x) >= self.level(y) { x } else { y }),
            (x, y) => x.or(y),
        }
    }

    /// `(child index, a_j, b_j)` for the children of `u` meeting `[a, b]`.
    /// The first and last children are the ones `a` and `b` route to.
    pub fn child_subranges(&self, u: NodeId, a: u64, b: u64) -> Vec<(usize, u64, u64)> {
        let mids = &self.nodes[u as usize].mids;
        let f = self.route_child(u, a);
        let g = self.route_child(u, b);
        (f..=g)
            .map(|j| {
                let aj = if j == f { a } else { mids[j] };
                let bj = if j == g { b } else { mids[j + 1] - 1 };
                (j, aj, bj)
            })
            .collect()
    }

    /// Structural self-check.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        let mut live = 0;
        let mut leaf_level: Option<u32> = None;
        for v in self.subtree(self.root) {
            let n = &self.nodes[v as usize];
            if !n.alive {
                return Err("dead node reachable");
            }
            if n.lo > n.hi {
                return Err("empty span");
            }
            if v != self.root {
                let cap = 2 * self.level_weight(n.level);
                let floor = self.level_weight(n.level) / 2;
                if self.weight(v) > cap {
                    return Err("node above weight bound");
                }
                if self.weight(v) < floor {
                    return Err("node below weight bound");
                }
            }
            if n.level == 0 {
                if *leaf_level.get_or_insert(0) != 0 {
                    return Err("leaves at different depths");
                }
                if n.elems.windows(2).any(|w| w[0].value >= w[1].value) {
                    return Err("leaf not sorted");
                }
                if n.elems.iter().any(|p| p.value < n.lo || p.value > n.hi) {
                    return Err("element outside leaf span");
                }
                if n.live != n.elems.len() || n.ghosts != n.dead.len() || n.leaves != 1 {
                    return Err("leaf counters");
                }
                if n.dead.windows(2).any(|w| w[0] >= w[1])
                    || n.dead.iter().any(|&x| x < n.lo || x > n.hi)
                    || n.dead
                        .iter()
                        .any(|&x| n.elems.binary_search_by_key(&x, |p| p.value).is_ok())
                {
                    return Err("deletion markers");
                }
                live += n.live;
                let (k1, k2) = self.compute_keys(v);
                if k1 != n.k1 || k2 != n.k2 {
                    return Err("stale ancestor keys");
                }
                if n.k1.windows(2).any(|w| w[0].0 < w[1].0)
                    || n.k2.windows(2).any(|w| w[0].0 > w[1].0)
                {
                    return Err("ancestor keys not monotone");
                }
            } else {
                if n.children.is_empty() || n.children.len() != n.mids.len() {
                    return Err("child table");
                }
                if n.mids.windows(2).any(|w| w[0] >= w[1]) || n.mids[0] != n.lo {
                    return Err("middle values not increasing");
                }
                let mut sl = 0;
                let mut sg = 0;
                let mut sv = 0;
                for (i, &c) in n.children.iter().enumerate() {
                    let cn = &self.nodes[c as usize];
                    if cn.parent != v || cn.level + 1 != n.level || cn.lo != n.mids[i] {
                        return Err("child link");
                    }
                    let c_hi = if i + 1 < n.mids.len() {
                        n.mids[i + 1] - 1
                    } else {
                        n.hi
                    };
                    if cn.hi != c_hi {
                        return Err("child span");
                    }
                    sl += cn.live;
                    sg += cn.ghosts;
                    sv += cn.leaves;
                }
                if sl != n.live || sg != n.ghosts || sv != n.leaves {
                    return Err("internal counters");
                }
            }
        }
        if live != self.live {
            return Err("live count");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(vals: impl IntoIterator<Item = u64>) -> Vec<ColoredPoint> {
        vals.into_iter()
            .map(|v| ColoredPoint::new(v, (v % 5) as u32))
            .collect()
    }

    #[test]
    fn build_shapes() {
        let t = WbTree::build(&[]).unwrap();
        assert!(t.is_leaf(t.root()));
        t.check_invariants().unwrap();
        let t = WbTree::build_with(&pts(1..=1000), Some(4)).unwrap();
        t.check_invariants().unwrap();
        assert!(t.height() >= 2);
        for &v in &[1, 500, 1000] {
            assert_eq!(t.find(v).map(|x| x.1), Some((v % 5) as u32));
        }
        assert_eq!(t.find(1001), None);
    }

    #[test]
    fn ascending_inserts_split_leaves() {
        let mut t = WbTree::build_with(&[], Some(4)).unwrap();
        // n0 = 0 forces rebuilds while tiny; then splits take over.
        for v in 1..=300u64 {
            t.insert(ColoredPoint::new(v, 0)).unwrap();
            t.check_invariants().unwrap();
        }
        assert!(t.splits_per_level()[0] > 0 || t.rebuilds() > 0);
        assert_eq!(t.len(), 300);
    }

    #[test]
    fn leaf_split_adds_one_middle_value() {
        let mut t = WbTree::build_with(&pts((1..=64).map(|v| v * 10)), Some(8)).unwrap();
        let leaf = t.route(15);
        let parent = t.parent(leaf).unwrap();
        let before = t.mids(parent).len();
        let mut v = 11;
        let mut split = false;
        while !split {
            let out = t.insert(ColoredPoint::new(v, 0)).unwrap();
            split = out.splits.iter().any(|e| e.level == 0);
            assert!(!out.rebuilt);
            v += 1;
        }
        assert_eq!(t.mids(parent).len(), before + 1);
        t.check_invariants().unwrap();
    }

    #[test]
    fn leaves_of_deleted_values_still_split() {
        // Empty a run of leaves, then refill the same gaps with fresh values:
        // the markers carry the weight, so the splits must divide them too.
        let mut t = WbTree::build_with(&pts((1..=400).map(|v| v * 10)), Some(2)).unwrap();
        for k in 40..120u64 {
            t.delete(k * 10).unwrap();
            t.check_invariants().unwrap();
        }
        for k in 40..120u64 {
            for d in 1..4 {
                t.insert(ColoredPoint::new(k * 10 + d, 1)).unwrap();
                t.check_invariants().unwrap();
            }
        }
        assert_eq!(t.rebuilds(), 0);
        t.insert(ColoredPoint::new(400, 2)).unwrap();
        t.check_invariants().unwrap();
        assert_eq!(t.len(), 320 + 240 + 1);
    }

    #[test]
    fn lazy_deletes_then_rebuild() {
        let mut t = WbTree::build_with(&pts(1..=100), Some(4)).unwrap();
        let shape = t.mids(t.root()).to_vec();
        for v in 1..=49 {
            let (_, out) = t.delete(v).unwrap();
            assert!(!out.rebuilt);
        }
        assert_eq!(t.mids(t.root()), &shape[..]);
        t.check_invariants().unwrap();
        let (_, out) = t.delete(50).unwrap();
        assert!(out.rebuilt);
        assert_eq!(t.n0(), 50);
        t.check_invariants().unwrap();
        assert_eq!(t.delete(50), Err(Error::NotFound(50)));
    }

    #[test]
    fn subranges_example() {
        // A root with three children whose middle values are 10 and 20.
        let p = pts([1, 2, 3, 10, 11, 12, 20, 21, 22]);
        let t = WbTree::build_with(&p, Some(3)).unwrap();
        assert_eq!(t.mids(t.root()), [0, 10, 20]);
        let r = t.root();
        assert_eq!(
            t.child_subranges(r, 5, 25),
            [(0, 5, 9), (1, 10, 19), (2, 20, 25)]
        );
        assert_eq!(t.child_subranges(r, 11, 12), [(1, 11, 12)]);
        assert_eq!(t.child_subranges(r, 10, 21), [(1, 10, 19), (2, 20, 21)]);
    }

    #[test]
    fn hra_examples() {
        let p = pts([1, 2, 3, 10, 11, 12, 20, 21, 22]);
        let t = WbTree::build_with(&p, Some(3)).unwrap();
        let mut m = CostMeter::default();
        let leaf = t.route(2);
        assert_eq!(t.hra_query(leaf, 1, 3, &mut m), None);
        assert_eq!(t.hra_query(leaf, 1, u64::MAX, &mut m), Some(t.root()));
        assert_eq!(t.hra_query(t.route(11), 11, 20, &mut m), Some(t.root()));
    }
}
