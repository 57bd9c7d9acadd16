//! Three-sided reporting over a narrow stripe: points whose `y` is a small
//! integer in `[1, H]` with `H` around `log N`. Queries report every point
//! with `a <= x <= b` and `y >= c` in time linear in the output.
//!
//! Points are cut into groups of `Θ(log N)` consecutive points. For each
//! group `i` and threshold `h` we keep `gmin(i, h)` / `gmax(i, h)`: the
//! smallest / largest `x` among group points whose `y` decomposes (base
//! `τ`) into a threshold set containing `h`. A handful of thresholds
//! `f_0..f_g` derived from `c` recover the true extremes of the points with
//! `y >= c` in every group, so probing the per-threshold sets with `[a, b]`
//! finds every group holding an answer, each at most `g + 1` times.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pst::{Pst, PstPoint};
use crate::types::{ceil_log2, ceil_sqrt, CostMeter};

const NONE_MIN: u64 = u64::MAX;
const NONE_MAX: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StripePoint {
    pub x: u64,
    pub y: u32,
    pub tag: u32,
}

/// Base-`τ` parameters of a stripe of height `H = τ^g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tau {
    pub tau: u32,
    pub g: u32,
    pub height: u32,
}

impl Tau {
    /// `τ = max(2, ceil(sqrt(log_n)))` and the smallest power of `τ` that is
    /// at least `max(log_n, y_max)`.
    pub fn new(log_n: u32, y_max: u32) -> Tau {
        let tau = ceil_sqrt(log_n as u64).max(2) as u32;
        Tau::with_base(tau, log_n.max(y_max))
    }

    pub fn with_base(tau: u32, at_least: u32) -> Tau {
        assert!(tau >= 2);
        let mut height = 1u32;
        let mut g = 0;
        while height < at_least {
            height *= tau;
            g += 1;
        }
        Tau { tau, g, height }
    }

    /// Digits of `h`, least significant first, `g + 1` of them.
    pub fn digits(&self, mut h: u32) -> Vec<u32> {
        let mut d = Vec::with_capacity(self.g as usize + 1);
        for _ in 0..=self.g {
            d.push(h % self.tau);
            h /= self.tau;
        }
        d
    }

    /// `{ h_{r,s} }`: for each digit position `r` (high to low) and each
    /// `1 <= s <= a_r`, the higher digits of `h` followed by `s · τ^r`.
    pub fn update_thresholds(&self, h: u32) -> Vec<u32> {
        let d = self.digits(h);
        let mut out = Vec::new();
        let mut prefix = 0u32;
        let mut pow = self.tau.pow(self.g);
        for r in (0..=self.g as usize).rev() {
            for s in 1..=d[r] {
                out.push(prefix + s * pow);
            }
            prefix += d[r] * pow;
            pow /= self.tau.max(1);
        }
        out
    }

    /// `c` followed by `f_v` for `v >= 1`: the higher digits of `c` with
    /// digit `v` bumped by one and lower digits cleared. Values above `H`
    /// are dropped.
    pub fn query_thresholds(&self, c: u32) -> Vec<u32> {
        let d = self.digits(c);
        let mut out = Vec::with_capacity(self.g as usize + 1);
        out.push(c);
        for v in 1..=self.g as usize {
            let mut f: u64 = 0;
            let mut pow: u64 = 1;
            for (j, &dj) in d.iter().enumerate() {
                if j == v {
                    f += (dj as u64 + 1) * pow;
                } else if j > v {
                    f += dj as u64 * pow;
                }
                pow *= self.tau as u64;
            }
            if f <= self.height as u64 && !out.contains(&(f as u32)) {
                out.push(f as u32);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Group {
    /// Fixed lower end of the x-interval owned by the group.
    lo: u64,
    points: BTreeMap<u64, (u32, u32)>,
    gmin: Vec<u64>,
    gmax: Vec<u64>,
    /// Points keyed by x with `y' = H - y`, so `y >= c` is a bottom-open
    /// threshold.
    small: Pst,
}

/// Work counters for one stripe query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StripeStats {
    pub groups_visited: usize,
    /// Largest number of probe thresholds that hit the same group.
    pub max_visits_per_group: usize,
}

#[derive(Debug, Clone)]
pub struct Stripe {
    tau: Tau,
    log_n: u32,
    groups: Vec<Option<Group>>,
    free: Vec<u32>,
    /// Group lower bound -> group id.
    bounds: BTreeMap<u64, u32>,
    /// Every stored x -> group id.
    all: BTreeMap<u64, u32>,
    rmin: Vec<BTreeSet<(u64, u32)>>,
    rmax: Vec<BTreeSet<(u64, u32)>>,
    splits: u64,
    merges: u64,
}

impl Stripe {
    /// Empty stripe sized for about `n_hint` points with heights up to
    /// `y_max`.
    pub fn new(n_hint: usize, y_max: u32) -> Stripe {
        let log_n = ceil_log2(n_hint as u64);
        Stripe::with_tau(log_n, Tau::new(log_n, y_max))
    }

    fn with_tau(log_n: u32, tau: Tau) -> Stripe {
        let h = tau.height as usize;
        let mut s = Stripe {
            tau,
            log_n,
            groups: Vec::new(),
            free: Vec::new(),
            bounds: BTreeMap::new(),
            all: BTreeMap::new(),
            rmin: (0..=h).map(|_| BTreeSet::new()).collect(),
            rmax: (0..=h).map(|_| BTreeSet::new()).collect(),
            splits: 0,
            merges: 0,
        };
        let g = s.alloc(Group::empty(0, h));
        s.bounds.insert(0, g);
        s
    }

    /// Stripe holding `points`, sized for `n_hint` (at least the count).
    pub fn build(points: &[StripePoint], n_hint: usize, y_max: u32) -> Result<Stripe> {
        let top = points.iter().map(|p| p.y).max().unwrap_or(1).max(y_max);
        let mut s = Stripe::new(n_hint.max(points.len()), top);
        let mut sorted = points.to_vec();
        sorted.sort_unstable_by_key(|p| p.x);
        if let Some(w) = sorted.windows(2).find(|w| w[0].x == w[1].x) {
            return Err(Error::DuplicateCoordinate(w[0].x));
        }
        if let Some(p) = sorted.iter().find(|p| p.y == 0) {
            return Err(Error::HeightOutOfRange {
                y: p.y,
                max: s.tau.height,
            });
        }
        s.bulk_load(&sorted)?;
        Ok(s)
    }

    fn bulk_load(&mut self, sorted: &[StripePoint]) -> Result<()> {
        let target = self.log_n.max(1) as usize;
        let first = *self.bounds.get(&0).expect("first group");
        let chunks: Vec<&[StripePoint]> = sorted.chunks(target).collect();
        for (i, chunk) in chunks.iter().enumerate() {
            let gid = if i == 0 {
                first
            } else {
                let g = self.alloc(Group::empty(chunk[0].x, self.tau.height as usize));
                self.bounds.insert(chunk[0].x, g);
                g
            };
            let grp = self.group_mut(gid);
            for p in chunk.iter() {
                grp.points.insert(p.x, (p.y, p.tag));
            }
            for p in chunk.iter() {
                self.all.insert(p.x, gid);
            }
            self.refresh(gid)?;
        }
        Ok(())
    }

    fn alloc(&mut self, g: Group) -> u32 {
        if let Some(id) = self.free.pop() {
            self.groups[id as usize] = Some(g);
            id
        } else {
            self.groups.push(Some(g));
            (self.groups.len() - 1) as u32
        }
    }

    fn group(&self, gid: u32) -> &Group {
        self.groups[gid as usize].as_ref().expect("live group")
    }

    fn group_mut(&mut self, gid: u32) -> &mut Group {
        self.groups[gid as usize].as_mut().expect("live group")
    }

    pub fn tau(&self) -> Tau {
        self.tau
    }

    pub fn height(&self) -> u32 {
        self.tau.height
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn splits(&self) -> u64 {
        self.splits
    }

    pub fn merges(&self) -> u64 {
        self.merges
    }

    pub fn get(&self, x: u64) -> Option<StripePoint> {
        let gid = *self.all.get(&x)?;
        let &(y, tag) = self.group(gid).points.get(&x)?;
        Some(StripePoint { x, y, tag })
    }

    pub fn points(&self) -> Vec<StripePoint> {
        self.bounds
            .values()
            .flat_map(|&g| {
                self.group(g)
                    .points
                    .iter()
                    .map(|(&x, &(y, tag))| StripePoint { x, y, tag })
            })
            .collect()
    }

    fn group_of(&self, x: u64) -> u32 {
        *self
            .bounds
            .range(..=x)
            .next_back()
            .expect("group 0 owns 0")
            .1
    }

    /// Removes the group's table entries from the threshold sets.
    fn detach(&mut self, gid: u32) {
        let g = self.groups[gid as usize].as_ref().expect("live group");
        for h in 1..g.gmin.len() {
            if g.gmin[h] != NONE_MIN {
                self.rmin[h].remove(&(g.gmin[h], gid));
            }
            if g.gmax[h] != NONE_MAX {
                self.rmax[h].remove(&(g.gmax[h], gid));
            }
        }
    }

    /// Recomputes tables and the small tree from the group's points, then
    /// re-registers its table entries.
    fn refresh(&mut self, gid: u32) -> Result<()> {
        self.detach(gid);
        let tau = self.tau;
        let hh = tau.height as u64;
        let g = self.groups[gid as usize].as_mut().expect("live group");
        g.gmin.iter_mut().for_each(|v| *v = NONE_MIN);
        g.gmax.iter_mut().for_each(|v| *v = NONE_MAX);
        let mut pts = Vec::with_capacity(g.points.len());
        for (&x, &(y, tag)) in &g.points {
            for h in tau.update_thresholds(y) {
                let h = h as usize;
                g.gmin[h] = g.gmin[h].min(x);
                g.gmax[h] = g.gmax[h].max(x);
            }
            pts.push(PstPoint {
                x,
                y: hh - y as u64,
                tag,
            });
        }
        g.small = Pst::build(pts)?;
        for h in 1..g.gmin.len() {
            if g.gmin[h] != NONE_MIN {
                self.rmin[h].insert((g.gmin[h], gid));
            }
            if g.gmax[h] != NONE_MAX {
                self.rmax[h].insert((g.gmax[h], gid));
            }
        }
        Ok(())
    }

    fn rebuild_taller(&mut self, y_max: u32) -> Result<()> {
        let pts = self.points();
        let mut fresh = Stripe::with_tau(
            self.log_n,
            Tau::with_base(self.tau.tau, y_max.max(self.log_n)),
        );
        fresh.bulk_load(&pts)?;
        fresh.splits = self.splits;
        fresh.merges = self.merges;
        *self = fresh;
        Ok(())
    }

    pub fn insert(&mut self, p: StripePoint) -> Result<()> {
        if p.y == 0 {
            return Err(Error::HeightOutOfRange {
                y: 0,
                max: self.tau.height,
            });
        }
        if self.all.contains_key(&p.x) {
            return Err(Error::DuplicateCoordinate(p.x));
        }
        if p.y > self.tau.height {
            self.rebuild_taller(p.y)?;
        }
        let gid = self.group_of(p.x);
        self.all.insert(p.x, gid);
        let hh = self.tau.height as u64;
        let ths = self.tau.update_thresholds(p.y);
        let g = self.groups[gid as usize].as_mut().expect("live group");
        g.points.insert(p.x, (p.y, p.tag));
        g.small.insert(PstPoint {
            x: p.x,
            y: hh - p.y as u64,
            tag: p.tag,
        })?;
        for h in ths {
            let h = h as usize;
            if p.x < g.gmin[h] {
                if g.gmin[h] != NONE_MIN {
                    self.rmin[h].remove(&(g.gmin[h], gid));
                }
                g.gmin[h] = p.x;
                self.rmin[h].insert((p.x, gid));
            }
            if p.x > g.gmax[h] {
                if g.gmax[h] != NONE_MAX {
                    self.rmax[h].remove(&(g.gmax[h], gid));
                }
                g.gmax[h] = p.x;
                self.rmax[h].insert((p.x, gid));
            }
        }
        if self.group(gid).points.len() > 2 * self.log_n.max(1) as usize {
            self.split(gid)?;
        }
        Ok(())
    }

    pub fn delete(&mut self, x: u64) -> Result<StripePoint> {
        let gid = *self.all.get(&x).ok_or(Error::NotFound(x))?;
        self.all.remove(&x);
        let g = self.group_mut(gid);
        let (y, tag) = g.points.remove(&x).expect("indexed point");
        g.small.delete(x)?;
        let ths = self.tau.update_thresholds(y);
        let g = self.group(gid);
        // A departing witness forces a rescan; groups are O(log N) points.
        if ths
            .iter()
            .any(|&h| g.gmin[h as usize] == x || g.gmax[h as usize] == x)
        {
            self.refresh(gid)?;
        }
        if self.group(gid).points.len() < (self.log_n as usize / 2).max(1) {
            self.merge(gid)?;
        }
        Ok(StripePoint { x, y, tag })
    }

    fn split(&mut self, gid: u32) -> Result<()> {
        let g = self.group_mut(gid);
        let mid = *g.points.keys().nth(g.points.len() / 2).expect("non-empty");
        let upper = g.points.split_off(&mid);
        let mut ng = Group::empty(mid, self.tau.height as usize);
        ng.points = upper;
        let nid = self.alloc(ng);
        self.bounds.insert(mid, nid);
        let moved: Vec<u64> = self.group(nid).points.keys().copied().collect();
        for x in moved {
            self.all.insert(x, nid);
        }
        self.refresh(gid)?;
        self.refresh(nid)?;
        self.splits += 1;
        Ok(())
    }

    /// Folds an underfull group into a neighbour, splitting again if the
    /// result is too large.
    fn merge(&mut self, gid: u32) -> Result<()> {
        if self.bounds.len() == 1 {
            return Ok(());
        }
        let lo = self.group(gid).lo;
        // Merge into the left neighbour when one exists, else absorb the
        // right neighbour.
        let (keep, gone) = match self.bounds.range(..lo).next_back() {
            Some((_, &left)) => (left, gid),
            None => (
                gid,
                *self.bounds.range(lo + 1..).next().expect("two groups").1,
            ),
        };
        self.detach(gone);
        let gone_group = self.groups[gone as usize].take().expect("live group");
        self.free.push(gone);
        self.bounds.remove(&gone_group.lo);
        for &x in gone_group.points.keys() {
            self.all.insert(x, keep);
        }
        let mut pts = gone_group.points;
        self.group_mut(keep).points.append(&mut pts);
        self.refresh(keep)?;
        self.merges += 1;
        if self.group(keep).points.len() > 2 * self.log_n.max(1) as usize {
            self.split(keep)?;
        }
        Ok(())
    }

    /// Every point with `a <= x <= b` and `y >= c`.
    pub fn query(&self, a: u64, b: u64, c: u32, meter: &mut CostMeter) -> Vec<StripePoint> {
        let mut out = Vec::new();
        self.query_into(a, b, c, usize::MAX, &mut out, meter);
        out
    }

    /// Like [`Stripe::query`] but gives up with `None` once more than
    /// `limit` points qualify.
    pub fn query_capped(
        &self,
        a: u64,
        b: u64,
        c: u32,
        limit: usize,
        meter: &mut CostMeter,
    ) -> Option<Vec<StripePoint>> {
        let mut out = Vec::new();
        self.query_into(a, b, c, limit, &mut out, meter)
            .then_some(out)
    }

    /// Returns false if more than `limit` points qualify; `out` then holds a
    /// partial answer.
    pub fn query_into(
        &self,
        a: u64,
        b: u64,
        c: u32,
        limit: usize,
        out: &mut Vec<StripePoint>,
        meter: &mut CostMeter,
    ) -> bool {
        self.query_stats(a, b, c, limit, out, meter).0
    }

    pub fn query_stats(
        &self,
        a: u64,
        b: u64,
        c: u32,
        limit: usize,
        out: &mut Vec<StripePoint>,
        meter: &mut CostMeter,
    ) -> (bool, StripeStats) {
        let mut stats = StripeStats::default();
        if a > b {
            return (true, stats);
        }
        let c = c.max(1);
        if c > self.tau.height {
            return (true, stats);
        }
        meter.locate(1);
        let Some((_, &g0)) = self.all.range(a..=b).next() else {
            return (true, stats);
        };
        // (group, hits) for every group found through the threshold sets.
        let mut hit: Vec<(u32, usize)> = Vec::new();
        let lo0 = self.group(g0).lo;
        let next_lo = self.bounds.range(lo0 + 1..).next().map(|(&l, _)| l);
        let inside_one = lo0 <= a && next_lo.is_none_or(|l| b < l);
        if inside_one {
            hit.push((g0, 1));
        } else {
            for f in self.tau.query_thresholds(c) {
                let f = f as usize;
                let mut seen_here: Vec<u32> = Vec::new();
                let probes = self.rmin[f]
                    .range((a, 0)..=(b, u32::MAX))
                    .chain(self.rmax[f].range((a, 0)..=(b, u32::MAX)));
                for &(_, gid) in probes {
                    meter.touch(1);
                    if seen_here.contains(&gid) {
                        continue;
                    }
                    seen_here.push(gid);
                    match hit.iter_mut().find(|(g, _)| *g == gid) {
                        Some(e) => e.1 += 1,
                        None => hit.push((gid, 1)),
                    }
                }
            }
        }
        stats.groups_visited = hit.len();
        stats.max_visits_per_group = hit.iter().map(|h| h.1).max().unwrap_or(0);
        let hh = self.tau.height as u64;
        let cut = hh - c as u64 + 1;
        let mut pts = Vec::new();
        for &(gid, _) in &hit {
            pts.clear();
            let left = limit.saturating_sub(out.len());
            let complete = self
                .group(gid)
                .small
                .query_limited(a, b, cut, left, &mut pts, meter);
            out.extend(pts.iter().map(|p| StripePoint {
                x: p.x,
                y: (hh - p.y) as u32,
                tag: p.tag,
            }));
            if !complete {
                return (false, stats);
            }
        }
        (true, stats)
    }

    /// Smallest / largest x among group points with `y >= c`.
    fn true_extremes(&self, gid: u32, c: u32) -> (u64, u64) {
        let g = self.group(gid);
        let mut lo = NONE_MIN;
        let mut hi = NONE_MAX;
        for (&x, &(y, _)) in &g.points {
            if y >= c {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo, hi)
    }

    /// For every group and threshold, the true extremes of the points with
    /// `y >= c` appear among the tables at the probe thresholds of `c`.
    pub fn probe_thresholds_recover_extremes(&self) -> bool {
        for &gid in self.bounds.values() {
            let g = self.group(gid);
            for c in 1..=self.tau.height {
                let (lo, hi) = self.true_extremes(gid, c);
                let fs = self.tau.query_thresholds(c);
                let mins: Vec<u64> = fs.iter().map(|&f| g.gmin[f as usize]).collect();
                let maxs: Vec<u64> = fs.iter().map(|&f| g.gmax[f as usize]).collect();
                if lo == NONE_MIN {
                    if mins.iter().any(|&m| m != NONE_MIN) {
                        return false;
                    }
                    continue;
                }
                if !mins.contains(&lo) || !maxs.contains(&hi) {
                    return false;
                }
                if mins.iter().any(|&m| m < lo) || maxs.iter().any(|&m| m != NONE_MAX && m > hi) {
                    return false;
                }
            }
        }
        true
    }

    /// Structural self-check: tables, threshold sets, memberships, sizes.
    pub fn check_invariants(&self) -> core::result::Result<(), &'static str> {
        let mut prev_hi: Option<u64> = None;
        let mut entries = 0usize;
        for (&lo, &gid) in &self.bounds {
            let g = self.group(gid);
            if g.lo != lo {
                return Err("group bound mismatch");
            }
            if let (Some(first), Some(ph)) = (g.points.keys().next(), prev_hi) {
                if *first <= ph {
                    return Err("groups overlap");
                }
            }
            if g.points.keys().next().is_some_and(|&x| x < lo) {
                return Err("point below group bound");
            }
            if let Some(&last) = g.points.keys().next_back() {
                prev_hi = Some(last);
            }
            if g.points.len() > 2 * self.log_n.max(1) as usize {
                return Err("group overfull");
            }
            if g.small.len() != g.points.len() {
                return Err("small tree out of sync");
            }
            for &x in g.points.keys() {
                if self.all.get(&x) != Some(&gid) {
                    return Err("membership out of sync");
                }
            }
            for h in 1..=self.tau.height as usize {
                let mut lo_h = NONE_MIN;
                let mut hi_h = NONE_MAX;
                for (&x, &(y, _)) in &g.points {
                    if self.tau.update_thresholds(y).contains(&(h as u32)) {
                        lo_h = lo_h.min(x);
                        hi_h = hi_h.max(x);
                    }
                }
                if g.gmin[h] != lo_h || g.gmax[h] != hi_h {
                    return Err("stale table entry");
                }
                if lo_h != NONE_MIN {
                    if !self.rmin[h].contains(&(lo_h, gid)) || !self.rmax[h].contains(&(hi_h, gid))
                    {
                        return Err("threshold set missing entry");
                    }
                    entries += 1;
                }
            }
        }
        let stored: usize = self.rmin.iter().map(|s| s.len()).sum();
        let stored_max: usize = self.rmax.iter().map(|s| s.len()).sum();
        if stored != entries || stored_max != entries {
            return Err("threshold set has extra entries");
        }
        if self.all.len()
            != self
                .bounds
                .values()
                .map(|&g| self.group(g).points.len())
                .sum::<usize>()
        {
            return Err("point count mismatch");
        }
        Ok(())
    }
}

impl Group {
    fn empty(lo: u64, height: usize) -> Group {
        Group {
            lo,
            points: BTreeMap::new(),
            gmin: alloc::vec![NONE_MIN; height + 1],
            gmax: alloc::vec![NONE_MAX; height + 1],
            small: Pst::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau4() -> Tau {
        Tau::with_base(4, 16)
    }

    fn sorted(mut v: Vec<u32>) -> Vec<u32> {
        v.sort_unstable();
        v
    }

    #[test]
    fn update_threshold_examples() {
        let t = tau4();
        assert_eq!((t.g, t.height), (2, 16));
        assert_eq!(sorted(t.update_thresholds(6)), [4, 5, 6]);
        assert_eq!(t.update_thresholds(1), [1]);
        assert_eq!(t.update_thresholds(16), [16]);
    }

    #[test]
    fn query_threshold_examples() {
        let t = tau4();
        // 16 is needed: a point at y = 16 has threshold set {16} only.
        assert_eq!(sorted(t.query_thresholds(6)), [6, 8, 16]);
        assert_eq!(sorted(t.query_thresholds(1)), [1, 4, 16]);
        assert_eq!(t.query_thresholds(16), [16]);
    }

    // Brute force: some probe threshold of c lies in T(y) iff y >= c.
    #[test]
    fn probes_meet_exactly_the_tall_points() {
        for (tau, top) in [(2, 16), (3, 27), (4, 16), (5, 25)] {
            let t = Tau::with_base(tau, top);
            for c in 1..=t.height {
                let fs = t.query_thresholds(c);
                for y in 1..=t.height {
                    let ts = t.update_thresholds(y);
                    let meets = fs.iter().any(|f| ts.contains(f));
                    assert_eq!(meets, y >= c, "tau={tau} c={c} y={y}");
                }
            }
        }
    }

    fn pt(x: u64, y: u32) -> StripePoint {
        StripePoint {
            x,
            y,
            tag: x as u32,
        }
    }

    #[test]
    fn query_example() {
        let s = Stripe::build(&[pt(10, 6), pt(11, 2), pt(40, 6)], 16, 16).unwrap();
        let mut m = CostMeter::default();
        assert_eq!(s.query(5, 45, 3, &mut m), [pt(10, 6), pt(40, 6)]);
        assert_eq!(s.query(5, 45, 1, &mut m).len(), 3);
        assert!(s.query(12, 39, 1, &mut m).is_empty());
    }

    #[test]
    fn insert_delete_tables() {
        let mut s = Stripe::new(16, 16);
        s.insert(pt(7, 6)).unwrap();
        s.check_invariants().unwrap();
        assert_eq!(s.insert(pt(7, 1)), Err(Error::DuplicateCoordinate(7)));
        assert_eq!(s.delete(7).unwrap(), pt(7, 6));
        assert!(s.is_empty());
        s.check_invariants().unwrap();
        assert_eq!(s.delete(7), Err(Error::NotFound(7)));
    }

    #[test]
    fn grows_height_on_demand() {
        let mut s = Stripe::new(16, 4);
        s.insert(pt(3, 2)).unwrap();
        s.insert(pt(5, 40)).unwrap();
        assert!(s.height() >= 40);
        s.check_invariants().unwrap();
        let mut m = CostMeter::default();
        assert_eq!(s.query(1, 10, 30, &mut m), [pt(5, 40)]);
    }

    #[test]
    fn splits_and_merges() {
        let mut s = Stripe::new(256, 8);
        for x in 1..=200u64 {
            s.insert(pt(x * 3, (x % 8) as u32 + 1)).unwrap();
        }
        assert!(s.splits() > 0);
        s.check_invariants().unwrap();
        assert!(s.probe_thresholds_recover_extremes());
        for x in 1..=190u64 {
            s.delete(x * 3).unwrap();
        }
        assert!(s.merges() > 0);
        s.check_invariants().unwrap();
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn capped_query() {
        let pts: Vec<_> = (1..=50).map(|x| pt(x, 5)).collect();
        let s = Stripe::build(&pts, 64, 8).unwrap();
        let mut m = CostMeter::default();
        assert!(s.query_capped(1, 50, 1, 10, &mut m).is_none());
        assert_eq!(s.query_capped(1, 50, 1, 50, &mut m).unwrap().len(), 50);
    }
}
