//! Static color index laid out over a simulated block store.
//!
//! Same tree as [`crate::StaticIndex`] with leaves and lists grown to
//! `B * ceil(log_B N)` entries. `L(u)` entries carry `prev(e)`, which lets a
//! query stream its answer without a dedup pass: `R(u_l)` is read downward
//! while its values stay `>= a`, then `L(u_r)` upward while `<= b`,
//! emitting only entries with `prev(e) < a`. Each emitted color is new, so
//! the raw output stream has no duplicates. A full list that runs out
//! means the range holds at least `B log_B N` colors, and a block-per-node
//! priority search tree over `(e, prev(e))` answers it instead.
//!
//! Leaf-sized ranges are answered by a per-leaf blocked tree.
//!
//! Block reads spent on finding an element of the range and the split node
//! are counted in [`CostMeter::locate_reads`]; list and tree reads in
//! [`CostMeter::block_reads`].
//!
//! Layout: a directory block, then the sorted values with fence levels over
//! them, tree nodes in breadth-first order (three records each), the leaf
//! table, ancestor keys, lists (each starting on a block boundary), and the
//! blocked trees.

mod bpst;
mod store;

pub use store::{BlockStore, Io, Record, NIL};

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::ColorIndex;
use crate::static_index::StaticIndex;
use crate::types::{ceil_log, Color, ColoredPoint, CostMeter, QueryScratch};

/// File magic.
pub const MAGIC: &[u8; 4] = b"CRR1";
/// File format version.
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 4 + 4;
const FIXED_FIELDS: usize = 12;
const NODE_RECS: u64 = 3;
const LEAF_RECS: u64 = 2;

/// How an external query was answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmPath {
    Empty,
    Leaf,
    Lists,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Directory {
    leaf_size: u64,
    list_cap: u64,
    leaf_count: u64,
    node_count: u64,
    root: u64,
    values: u64,
    nodes: u64,
    leaf_table: u64,
    keys: u64,
    global: u64,
    /// First block of each fence level, bottom up.
    fences: Vec<u64>,
}

impl Directory {
    fn fields(&self) -> Vec<u64> {
        let mut f = vec![
            (FIXED_FIELDS + self.fences.len()) as u64,
            self.leaf_size,
            self.list_cap,
            self.leaf_count,
            self.node_count,
            self.root,
            self.values,
            self.nodes,
            self.leaf_table,
            self.keys,
            self.global,
            self.fences.len() as u64,
        ];
        f.extend_from_slice(&self.fences);
        f
    }

    fn from_fields(f: &[u64]) -> Directory {
        Directory {
            leaf_size: f[1],
            list_cap: f[2],
            leaf_count: f[3],
            node_count: f[4],
            root: f[5],
            values: f[6],
            nodes: f[7],
            leaf_table: f[8],
            keys: f[9],
            global: f[10],
            fences: f[FIXED_FIELDS..FIXED_FIELDS + f[11] as usize].to_vec(),
        }
    }
}

fn dir_blocks(fields: usize, b: usize) -> usize {
    fields.div_ceil(4 * b)
}

/// Number of keys on each level: value blocks first, then each fence level.
fn level_sizes(n: usize, b: usize) -> Vec<usize> {
    let mut sizes = vec![n.div_ceil(b)];
    while *sizes.last().expect("nonempty") > 1 {
        let s = sizes.last().expect("nonempty").div_ceil(b);
        sizes.push(s);
    }
    sizes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmIndex {
    store: BlockStore,
    n: u64,
    palette: u32,
    dir: Directory,
}

impl EmIndex {
    /// Builds over points sorted by strictly increasing value.
    pub fn build(points: &[ColoredPoint], b: usize) -> Result<EmIndex> {
        let mut store = BlockStore::new(b)?;
        let n = points.len();
        let size = b * ceil_log(b as u64, n as u64) as usize;
        let st = StaticIndex::with_params(points, size, size)?;
        let sizes = if n == 0 {
            Vec::new()
        } else {
            level_sizes(n, b)
        };
        let fence_levels = sizes.len().saturating_sub(1);
        store.alloc(dir_blocks(FIXED_FIELDS + fence_levels, b) * b);
        let bu = b as u64;

        let values = store.alloc(n);
        for i in 0..n {
            store.write(
                values * bu + i as u64,
                [st.values[i], st.colors[i] as u64, st.prevs[i], 0],
            );
        }
        let mut fences = Vec::new();
        let mut below = values;
        for &size in &sizes[..fence_levels] {
            let start = store.alloc(size);
            for j in 0..size {
                let key = store.peek(below + j as u64)[0][0];
                store.write(start * bu + j as u64, [key, 0, 0, 0]);
            }
            fences.push(start);
            below = start;
        }

        // Breadth-first renumbering of the tree.
        let mut order = Vec::new();
        let mut new_id = vec![NIL; st.nodes.len()];
        if n > 0 {
            let mut q = VecDeque::from([st.root]);
            while let Some(v) = q.pop_front() {
                new_id[v as usize] = order.len() as u64;
                order.push(v);
                let node = &st.nodes[v as usize];
                if node.leaf == u32::MAX {
                    q.push_back(node.left);
                    q.push_back(node.right);
                }
            }
        }
        let map = |v: u32| {
            if v == u32::MAX {
                NIL
            } else {
                new_id[v as usize]
            }
        };

        let nodes = store.alloc(order.len() * NODE_RECS as usize);
        let leaf_table = store.alloc(st.leaves.len() * LEAF_RECS as usize);
        let key_count: usize = st.leaves.iter().map(|l| l.k1.len() + l.k2.len()).sum();
        let keys = store.alloc(key_count);

        let mut list_at = vec![(NIL, 0u64); st.nodes.len()];
        for &v in &order {
            let list = &st.nodes[v as usize].list;
            if list.is_empty() {
                continue;
            }
            let blk = store.alloc(list.len());
            for (k, e) in list.iter().enumerate() {
                let prev = st.prevs[st.values.binary_search(&e.value).expect("stored")];
                store.write(blk * bu + k as u64, [e.value, prev, e.color as u64, 0]);
            }
            list_at[v as usize] = (blk, list.len() as u64);
        }
        for (i, &v) in order.iter().enumerate() {
            let node = &st.nodes[v as usize];
            let base = (nodes * bu) + i as u64 * NODE_RECS;
            let is_leaf = node.leaf != u32::MAX;
            let (l, r) = if is_leaf {
                (NIL, NIL)
            } else {
                (map(node.left), map(node.right))
            };
            let (lb, ll) = if is_leaf {
                (NIL, 0)
            } else {
                list_at[node.left as usize]
            };
            let (rb, rl) = if is_leaf {
                (NIL, 0)
            } else {
                list_at[node.right as usize]
            };
            store.write(base, [node.m, l, r, node.height as u64]);
            store.write(base + 1, [lb, ll, rb, rl]);
            let leaf = if is_leaf { node.leaf as u64 } else { NIL };
            store.write(base + 2, [leaf, map(node.parent), 0, 0]);
        }

        let mut next_key = keys * bu;
        for (i, leaf) in st.leaves.iter().enumerate() {
            let pts: Vec<Record> = (leaf.start..leaf.end)
                .map(|p| [st.values[p], st.prevs[p], st.colors[p] as u64, 0])
                .collect();
            let pst = bpst::build(&mut store, &pts);
            let k1 = next_key;
            for &(m, v) in &leaf.k1 {
                store.write(next_key, [m, map(v), 0, 0]);
                next_key += 1;
            }
            let k2 = next_key;
            for &(m, v) in &leaf.k2 {
                store.write(next_key, [m, map(v), 0, 0]);
                next_key += 1;
            }
            let base = leaf_table * bu + i as u64 * LEAF_RECS;
            store.write(base, [map(leaf.node), pst, k1, leaf.k1.len() as u64]);
            store.write(
                base + 1,
                [k2, leaf.k2.len() as u64, leaf.start as u64, leaf.end as u64],
            );
        }

        let all: Vec<Record> = (0..n)
            .map(|p| [st.values[p], st.prevs[p], st.colors[p] as u64, 0])
            .collect();
        let global = bpst::build(&mut store, &all);

        let dir = Directory {
            leaf_size: size as u64,
            list_cap: size as u64,
            leaf_count: st.leaves.len() as u64,
            node_count: order.len() as u64,
            root: if n == 0 { NIL } else { 0 },
            values,
            nodes,
            leaf_table,
            keys,
            global,
            fences,
        };
        for (i, chunk) in dir.fields().chunks(4).enumerate() {
            let mut r = [0; 4];
            r[..chunk.len()].copy_from_slice(chunk);
            store.write(i as u64, r);
        }
        Ok(EmIndex {
            store,
            n: n as u64,
            palette: st.palette as u32,
            dir,
        })
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn block_size(&self) -> usize {
        self.store.block_size()
    }

    pub fn block_count(&self) -> usize {
        self.store.block_count()
    }

    /// Points per leaf and entries per list, `B * ceil(log_B N)`.
    pub fn leaf_size(&self) -> usize {
        self.dir.leaf_size as usize
    }

    pub fn list_cap(&self) -> usize {
        self.dir.list_cap as usize
    }

    pub fn leaf_count(&self) -> usize {
        self.dir.leaf_count as usize
    }

    pub fn node_count(&self) -> usize {
        self.dir.node_count as usize
    }

    pub fn store(&self) -> &BlockStore {
        &self.store
    }

    /// Sorted position and value of the first element `>= a`, if `<= b`.
    fn locate(&self, a: u64, b: u64, meter: &mut CostMeter) -> Option<(u64, u64)> {
        if self.n == 0 {
            return None;
        }
        let bs = self.store.block_size();
        let bu = bs as u64;
        let sizes = level_sizes(self.n as usize, bs);
        let mut idx = 0u64;
        for level in (0..self.dir.fences.len()).rev() {
            let recs = self
                .store
                .read(self.dir.fences[level] + idx, Io::Locate, meter);
            let cnt = (sizes[level] as u64 - idx * bu).min(bu) as usize;
            let i = recs[..cnt].partition_point(|r| r[0] <= a).saturating_sub(1);
            idx = idx * bu + i as u64;
        }
        let recs = self.store.read(self.dir.values + idx, Io::Locate, meter);
        let cnt = (self.n - idx * bu).min(bu) as usize;
        let j = recs[..cnt].partition_point(|r| r[0] < a);
        let (pos, v) = if j < cnt {
            (idx * bu + j as u64, recs[j][0])
        } else if (idx + 1) * bu < self.n {
            let recs = self
                .store
                .read(self.dir.values + idx + 1, Io::Locate, meter);
            ((idx + 1) * bu, recs[0][0])
        } else {
            return None;
        };
        (v <= b).then_some((pos, v))
    }

    fn node(&self, v: u64, io: Io, meter: &mut CostMeter) -> [Record; 3] {
        let r = self.store.read_records(
            self.dir.nodes * self.store.block_size() as u64 + v * NODE_RECS,
            3,
            io,
            meter,
        );
        [r[0], r[1], r[2]]
    }

    /// Highest ancestor `u` of `leaf` with `a < m(u) <= b`.
    fn hra(&self, lt: &[Record], a: u64, b: u64, meter: &mut CostMeter) -> Option<u64> {
        let k1 = self
            .store
            .read_records(lt[0][2], lt[0][3] as usize, Io::Locate, meter);
        let k2 = self
            .store
            .read_records(lt[1][0], lt[1][1] as usize, Io::Locate, meter);
        let i1 = k1.partition_point(|r| r[0] <= b);
        let i2 = k2.partition_point(|r| r[0] > a);
        let u1 = (i1 > 0).then(|| k1[i1 - 1][1]);
        let u2 = (i2 > 0).then(|| k2[i2 - 1][1]);
        match (u1, u2) {
            (Some(x), Some(y)) => {
                let hx = self.node(x, Io::Locate, meter)[0][3];
                let hy = self.node(y, Io::Locate, meter)[0][3];
                Some(if hx >= hy { x } else { y })
            }
            (x, y) => x.or(y),
        }
    }

    /// Query returning the raw emission stream (never deduplicated) and the
    /// branch taken.
    pub fn query_traced(
        &self,
        a: u64,
        b: u64,
        meter: &mut CostMeter,
    ) -> Result<(Vec<Color>, EmPath)> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let Some((pos, first)) = self.locate(a, b, meter) else {
            return Ok((Vec::new(), EmPath::Empty));
        };
        let bu = self.store.block_size() as u64;
        let leaf = pos / self.dir.leaf_size;
        let lt = self.store.read_records(
            self.dir.leaf_table * bu + leaf * LEAF_RECS,
            2,
            Io::Locate,
            meter,
        );
        let mut out = Vec::new();
        let Some(u) = self.hra(&lt, first, b, meter) else {
            bpst::query(&self.store, lt[0][1], a, b, a, &mut out, meter);
            return Ok((out, EmPath::Leaf));
        };
        let lists = self.node(u, Io::Locate, meter)[1];
        let cap = self.dir.list_cap;

        let fallback = 'lists: {
            // R(u_l): rightmost element per color, descending.
            let (blk, len) = (lists[0], lists[1]);
            let mut seen = 0;
            let mut stopped = false;
            'r: while seen < len {
                let recs = self.store.read(blk + seen / bu, Io::Report, meter);
                for r in &recs[..(len - seen).min(bu) as usize] {
                    if r[0] < a {
                        stopped = true;
                        break 'r;
                    }
                    out.push(r[2] as Color);
                }
                seen += bu;
            }
            if !stopped && len == cap {
                break 'lists true;
            }
            // L(u_r): leftmost element per color, ascending, with prev.
            let (blk, len) = (lists[2], lists[3]);
            let mut seen = 0;
            let mut stopped = false;
            'l: while seen < len {
                let recs = self.store.read(blk + seen / bu, Io::Report, meter);
                for r in &recs[..(len - seen).min(bu) as usize] {
                    if r[0] > b {
                        stopped = true;
                        break 'l;
                    }
                    if r[1] < a {
                        out.push(r[2] as Color);
                    }
                }
                seen += bu;
            }
            !stopped && len == cap
        };
        if fallback {
            out.clear();
            bpst::query(&self.store, self.dir.global, a, b, a, &mut out, meter);
            return Ok((out, EmPath::Fallback));
        }
        Ok((out, EmPath::Lists))
    }

    /// Layout audit: fences, node links, list order, blocked trees.
    pub fn audit(&self) -> core::result::Result<(), &'static str> {
        let bu = self.store.block_size() as u64;
        let rec = |r: u64| -> core::result::Result<Record, &'static str> {
            self.store
                .records()
                .get(r as usize)
                .copied()
                .ok_or("record out of range")
        };
        for i in 1..self.n {
            if rec(self.dir.values * bu + i - 1)?[0] >= rec(self.dir.values * bu + i)?[0] {
                return Err("values not increasing");
            }
        }
        let sizes = if self.n == 0 {
            Vec::new()
        } else {
            level_sizes(self.n as usize, bu as usize)
        };
        if self.dir.fences.len() != sizes.len().saturating_sub(1) {
            return Err("fence depth");
        }
        let mut below = self.dir.values;
        for (level, &start) in self.dir.fences.iter().enumerate() {
            for j in 0..sizes[level] as u64 {
                if rec(start * bu + j)?[0] != rec((below + j) * bu)?[0] {
                    return Err("fence key mismatch");
                }
            }
            below = start;
        }
        for v in 0..self.dir.node_count {
            let base = self.dir.nodes * bu + v * NODE_RECS;
            let [m, l, r, h] = rec(base)?;
            let [lb, ll, rb, rl] = rec(base + 1)?;
            if rec(base + 2)?[0] != NIL {
                if l != NIL || r != NIL || h != 0 {
                    return Err("leaf node with children");
                }
                continue;
            }
            if l >= self.dir.node_count || r >= self.dir.node_count || l <= v || r <= v {
                return Err("child link not breadth-first");
            }
            if rec(l * NODE_RECS + self.dir.nodes * bu + 2)?[1] != v {
                return Err("parent link");
            }
            if ll > self.dir.list_cap || rl > self.dir.list_cap {
                return Err("list longer than its capacity");
            }
            let rlist: Vec<Record> = (0..ll)
                .map(|k| rec(lb * bu + k))
                .collect::<core::result::Result<_, _>>()?;
            let llist: Vec<Record> = (0..rl)
                .map(|k| rec(rb * bu + k))
                .collect::<core::result::Result<_, _>>()?;
            if rlist.windows(2).any(|w| w[0][0] <= w[1][0]) {
                return Err("R list not descending");
            }
            if llist.windows(2).any(|w| w[0][0] >= w[1][0]) {
                return Err("L list not ascending");
            }
            if rlist.iter().any(|e| e[0] >= m) || llist.iter().any(|e| e[0] < m) {
                return Err("list entry on the wrong side of the middle value");
            }
            if llist.iter().any(|e| e[1] >= e[0]) {
                return Err("prev link not below its element");
            }
        }
        let mut total = 0;
        for i in 0..self.dir.leaf_count {
            let lt = rec(self.dir.leaf_table * bu + i * LEAF_RECS)?;
            let lt2 = rec(self.dir.leaf_table * bu + i * LEAF_RECS + 1)?;
            let cnt = bpst::audit(&self.store, lt[1])?;
            if cnt as u64 != lt2[3] - lt2[2] {
                return Err("leaf tree size");
            }
            total += cnt;
        }
        if total as u64 != self.n || bpst::audit(&self.store, self.dir.global)? as u64 != self.n {
            return Err("point count");
        }
        Ok(())
    }

    /// Serializes to the little-endian file format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let recs = self.store.records();
        let mut out = Vec::with_capacity(HEADER_LEN + recs.len() * 32);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&(self.store.block_size() as u32).to_le_bytes());
        out.extend_from_slice(&self.palette.to_le_bytes());
        for r in recs {
            for w in r {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<EmIndex> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::Format("bad magic"));
        }
        let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().expect("2 bytes"));
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        if u16_at(4) != VERSION {
            return Err(Error::Format("unsupported version"));
        }
        let n = u64_at(6);
        let b = u32_at(14) as usize;
        let palette = u32_at(18);
        let body = &bytes[HEADER_LEN..];
        if b < 2 || !body.len().is_multiple_of(32 * b) || body.is_empty() {
            return Err(Error::Format("block array length"));
        }
        let records: Vec<Record> = body
            .chunks_exact(32)
            .map(|c| {
                core::array::from_fn(|k| {
                    u64::from_le_bytes(c[8 * k..8 * k + 8].try_into().expect("8 bytes"))
                })
            })
            .collect();
        let nfields = records[0][0] as usize;
        if !(FIXED_FIELDS..=FIXED_FIELDS + 64).contains(&nfields)
            || nfields.div_ceil(4) > records.len()
        {
            return Err(Error::Format("directory"));
        }
        let fields: Vec<u64> = records.iter().flatten().take(nfields).copied().collect();
        if fields[11] as usize != nfields - FIXED_FIELDS {
            return Err(Error::Format("directory"));
        }
        let dir = Directory::from_fields(&fields);
        let store = BlockStore::from_records(b, records)?;
        let idx = EmIndex {
            store,
            n,
            palette,
            dir,
        };
        idx.audit().map_err(Error::Format)?;
        Ok(idx)
    }
}

impl ColorIndex for EmIndex {
    fn len(&self) -> usize {
        self.n as usize
    }

    fn palette(&self) -> usize {
        self.palette as usize
    }

    fn query_with(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>> {
        self.query_traced(a, b, &mut scratch.meter).map(|x| x.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_report;
    use crate::test_fixtures::sample;
    use crate::types::Range;
    use alloc::collections::BTreeSet;

    fn sorted(mut v: Vec<Color>) -> Vec<Color> {
        v.sort_unstable();
        v
    }

    #[test]
    fn sample_single_leaf() {
        let em = EmIndex::build(&sample(), 4).unwrap();
        assert_eq!(em.leaf_count(), 1);
        em.audit().unwrap();
        for a in 1..=22 {
            for b in a..=22 {
                let mut m = CostMeter::default();
                let (got, path) = em.query_traced(a, b, &mut m).unwrap();
                let want: Vec<Color> = oracle_report(&sample(), Range::new(a, b).unwrap())
                    .into_iter()
                    .collect();
                assert_eq!(sorted(got), want);
                assert!(matches!(path, EmPath::Leaf | EmPath::Empty));
            }
        }
    }

    #[test]
    fn block_larger_than_input() {
        let em = EmIndex::build(&sample(), 64).unwrap();
        assert_eq!(em.leaf_count(), 1);
        assert_eq!(em.node_count(), 1);
    }

    #[test]
    fn multi_level_streams_without_duplicates() {
        let pts: Vec<_> = (1..=4096u64)
            .map(|v| ColoredPoint::new(v * 2, ((v * v) % 97) as u32))
            .collect();
        let em = EmIndex::build(&pts, 8).unwrap();
        assert!(em.leaf_count() > 8);
        em.audit().unwrap();
        let mut paths = BTreeSet::new();
        for (a, b) in [
            (1, 9000),
            (100, 180),
            (2000, 2100),
            (5, 7),
            (3000, 4500),
            (41, 42),
        ] {
            let mut m = CostMeter::default();
            let (got, path) = em.query_traced(a, b, &mut m).unwrap();
            paths.insert(path as u8);
            let uniq: BTreeSet<Color> = got.iter().copied().collect();
            assert_eq!(uniq.len(), got.len(), "duplicate emitted for [{a},{b}]");
            assert_eq!(uniq, oracle_report(&pts, Range::new(a, b).unwrap()));
        }
        assert!(paths.len() >= 3);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let pts: Vec<_> = (1..=500u64)
            .map(|v| ColoredPoint::new(v * 3, (v % 13) as u32))
            .collect();
        let em = EmIndex::build(&pts, 4).unwrap();
        let bytes = em.to_bytes();
        let back = EmIndex::from_bytes(&bytes).unwrap();
        assert_eq!(back, em);
        assert_eq!(back.to_bytes(), bytes);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(EmIndex::from_bytes(&bad).is_err());
        assert!(EmIndex::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let empty = EmIndex::build(&[], 4).unwrap();
        assert_eq!(EmIndex::from_bytes(&empty.to_bytes()).unwrap(), empty);
    }
}
