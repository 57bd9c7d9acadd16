use alloc::vec::Vec;

use crate::error::Result;
use crate::types::{Color, ColoredPoint, QueryScratch};

/// Read side shared by every index kind.
pub trait ColorIndex {
    /// Number of stored elements.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper bound on color ids (size of a dedup array that fits them all).
    fn palette(&self) -> usize;

    /// Distinct colors in `[a, b]`, each once, using caller-owned scratch.
    fn query_with(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>>;

    fn query(&self, a: u64, b: u64) -> Result<Vec<Color>> {
        let mut scratch = QueryScratch::new(self.palette());
        self.query_with(a, b, &mut scratch)
    }
}

/// Indexes that accept insertions and deletions.
pub trait DynamicColorIndex: ColorIndex {
    fn insert(&mut self, p: ColoredPoint) -> Result<()>;

    /// Removes `value`, returning the color it carried.
    fn delete(&mut self, value: u64) -> Result<Color>;
}
