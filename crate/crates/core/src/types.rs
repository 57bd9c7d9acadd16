use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense color id in `[0, C)`.
pub type Color = u32;

/// Value of `prev(e)`: the largest same-color coordinate before `e`, or
/// [`NO_PREV`] when `e` is the leftmost element of its color.
pub type PredLink = u64;

/// Sentinel prev-link. User coordinates start at 1, so `prev(e) < a` holds
/// for the leftmost element of every color without a branch.
pub const NO_PREV: PredLink = 0;

/// One element of the indexed set: a coordinate and its color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoredPoint {
    pub value: u64,
    pub color: Color,
}

impl ColoredPoint {
    pub const fn new(value: u64, color: Color) -> Self {
        ColoredPoint { value, color }
    }
}

/// Closed query interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Range {
    pub a: u64,
    pub b: u64,
}

impl Range {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidRange { a, b });
        }
        Ok(Range { a, b })
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Bijection between external color labels and dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorRemap<L: Ord> {
    forward: BTreeMap<L, Color>,
    reverse: Vec<L>,
}

impl<L: Ord> Default for ColorRemap<L> {
    fn default() -> Self {
        ColorRemap {
            forward: BTreeMap::new(),
            reverse: Vec::new(),
        }
    }
}

impl<L: Ord + Clone> ColorRemap<L> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `label`, registering it if unseen.
    pub fn intern(&mut self, label: L) -> Color {
        if let Some(&id) = self.forward.get(&label) {
            return id;
        }
        let id = self.reverse.len() as Color;
        self.reverse.push(label.clone());
        self.forward.insert(label, id);
        id
    }

    pub fn id(&self, label: &L) -> Option<Color> {
        self.forward.get(label).copied()
    }

    pub fn label(&self, id: Color) -> Option<&L> {
        self.reverse.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn labels(&self) -> &[L] {
        &self.reverse
    }
}

/// Counters standing in for the cost model: element touches during
/// reporting, navigation steps during locate, and block transfers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostMeter {
    /// Elements and nodes examined while producing output.
    pub touches: u64,
    /// Predecessor / navigation steps (locate phase).
    pub locate_ops: u64,
    /// Block transfers spent on reporting (external memory only).
    pub block_reads: u64,
    /// Block transfers spent on locate (external memory only).
    pub locate_reads: u64,
}

impl CostMeter {
    pub fn reset(&mut self) {
        *self = CostMeter::default();
    }

    #[inline]
    pub fn touch(&mut self, n: u64) {
        self.touches += n;
    }

    #[inline]
    pub fn locate(&mut self, n: u64) {
        self.locate_ops += n;
    }

    pub fn io_total(&self) -> u64 {
        self.block_reads + self.locate_reads
    }
}

/// One bit per color plus a touched list, so a dedup pass costs O(answer)
/// regardless of the palette size.
#[derive(Debug, Clone, Default)]
pub struct ColArray {
    seen: Vec<bool>,
    touched: Vec<Color>,
}

impl ColArray {
    pub fn new(colors: usize) -> Self {
        ColArray {
            seen: alloc::vec![false; colors],
            touched: Vec::new(),
        }
    }

    fn ensure(&mut self, color: Color) {
        let need = color as usize + 1;
        if self.seen.len() < need {
            self.seen.resize(need, false);
        }
    }

    /// Marks `color`; returns true on first sighting since the last reset.
    #[inline]
    pub fn mark(&mut self, color: Color) -> bool {
        self.ensure(color);
        let slot = &mut self.seen[color as usize];
        if *slot {
            false
        } else {
            *slot = true;
            self.touched.push(color);
            true
        }
    }

    pub fn reset(&mut self) {
        for &c in &self.touched {
            self.seen[c as usize] = false;
        }
        self.touched.clear();
    }

    pub fn is_clear(&self) -> bool {
        self.touched.is_empty() && self.seen.iter().all(|s| !s)
    }

    /// Keeps first occurrences in order, then clears itself.
    pub fn dedup(&mut self, colors: &mut Vec<Color>) {
        colors.retain(|&c| self.mark(c));
        self.reset();
    }
}

/// Per-reader scratch space: the dedup array and the cost meter.
#[derive(Debug, Clone, Default)]
pub struct QueryScratch {
    pub col: ColArray,
    pub meter: CostMeter,
}

impl QueryScratch {
    pub fn new(colors: usize) -> Self {
        QueryScratch {
            col: ColArray::new(colors),
            meter: CostMeter::default(),
        }
    }
}

/// `ceil(log2(max(n, 2)))`.
pub fn ceil_log2(n: u64) -> u32 {
    let n = n.max(2);
    64 - (n - 1).leading_zeros()
}

/// `ceil(sqrt(n))`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// `max(1, ceil(log_base n))` using integer arithmetic.
pub fn ceil_log(base: u64, n: u64) -> u32 {
    debug_assert!(base >= 2);
    let mut p: u64 = 1;
    let mut e = 0;
    while p < n {
        p = p.saturating_mul(base);
        e += 1;
    }
    e.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_math() {
        assert_eq!(ceil_log2(0), 1);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_sqrt(16), 4);
        assert_eq!(ceil_sqrt(17), 5);
        assert_eq!(ceil_log(4, 8), 2);
        assert_eq!(ceil_log(8, 1 << 14), 5);
        assert_eq!(ceil_log(64, 1 << 14), 3);
        assert_eq!(ceil_log(8, 1), 1);
    }

    #[test]
    fn range_rejects_inverted() {
        assert_eq!(Range::new(5, 4), Err(Error::InvalidRange { a: 5, b: 4 }));
        assert!(Range::new(4, 4).unwrap().contains(4));
    }

    #[test]
    fn dedup_keeps_first_occurrences() {
        let mut col = ColArray::new(3);
        let mut v = alloc::vec![1, 0, 1, 2, 0];
        col.dedup(&mut v);
        assert_eq!(v, [1, 0, 2]);
        assert!(col.is_clear());
        let mut empty = Vec::new();
        col.dedup(&mut empty);
        assert!(empty.is_empty());
    }

    #[test]
    fn remap_first_occurrence_order() {
        let mut r = ColorRemap::new();
        assert_eq!(r.intern("red"), 0);
        assert_eq!(r.intern("blue"), 1);
        assert_eq!(r.intern("red"), 0);
        assert_eq!(r.label(1), Some(&"blue"));
        assert_eq!(r.id(&"green"), None);
    }
}
