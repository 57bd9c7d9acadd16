//! Simulated disk: a flat array of fixed-size blocks with metered reads.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::CostMeter;

/// One record: four little-endian words.
pub type Record = [u64; 4];

/// Null block / node pointer.
pub const NIL: u64 = u64::MAX;

/// Which counter a block read is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Io {
    /// Finding an element of the range and the split node.
    Locate,
    /// Everything after that.
    Report,
}

/// `B` records per block. Every structure access goes through
/// [`BlockStore::read`], which counts exactly one transfer per call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStore {
    b: usize,
    records: Vec<Record>,
}

impl BlockStore {
    pub fn new(b: usize) -> Result<BlockStore> {
        if b < 2 {
            return Err(Error::InvalidParameter("block size must be at least 2"));
        }
        Ok(BlockStore {
            b,
            records: Vec::new(),
        })
    }

    pub(crate) fn from_records(b: usize, records: Vec<Record>) -> Result<BlockStore> {
        if b < 2 || !records.len().is_multiple_of(b) {
            return Err(Error::Format("block array not a whole number of blocks"));
        }
        Ok(BlockStore { b, records })
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn block_count(&self) -> usize {
        self.records.len() / self.b
    }

    pub(crate) fn records(&self) -> &[Record] {
        &self.records
    }

    /// Appends `n` zeroed records starting on a fresh block and pads to a
    /// block boundary. Returns the first block.
    pub(crate) fn alloc(&mut self, n: usize) -> u64 {
        let start = self.records.len() / self.b;
        let len = n.div_ceil(self.b).max(1) * self.b;
        self.records.resize(self.records.len() + len, [0; 4]);
        start as u64
    }

    pub(crate) fn write(&mut self, record: u64, r: Record) {
        self.records[record as usize] = r;
    }

    /// Reads block `blk`, charging one transfer to `io`.
    pub fn read(&self, blk: u64, io: Io, meter: &mut CostMeter) -> &[Record] {
        match io {
            Io::Locate => meter.locate_reads += 1,
            Io::Report => meter.block_reads += 1,
        }
        self.peek(blk)
    }

    /// Unmetered access, for building and auditing only.
    pub(crate) fn peek(&self, blk: u64) -> &[Record] {
        let s = blk as usize * self.b;
        &self.records[s..s + self.b]
    }

    /// Records `first..first + count`, reading each spanned block once.
    pub fn read_records(
        &self,
        first: u64,
        count: usize,
        io: Io,
        meter: &mut CostMeter,
    ) -> Vec<Record> {
        let mut out = Vec::with_capacity(count);
        let b = self.b as u64;
        let mut r = first;
        let end = first + count as u64;
        while r < end {
            let blk = r / b;
            let block = self.read(blk, io, meter);
            let hi = end.min((blk + 1) * b);
            out.extend_from_slice(&block[(r - blk * b) as usize..(hi - blk * b) as usize]);
            r = hi;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_is_block_aligned_and_reads_are_counted() {
        let mut s = BlockStore::new(4).unwrap();
        assert_eq!(s.alloc(1), 0);
        assert_eq!(s.alloc(5), 1);
        assert_eq!(s.block_count(), 3);
        let mut m = CostMeter::default();
        s.read(2, Io::Report, &mut m);
        s.read(0, Io::Locate, &mut m);
        assert_eq!((m.block_reads, m.locate_reads), (1, 1));
        let recs = s.read_records(3, 4, Io::Report, &mut m);
        assert_eq!(recs.len(), 4);
        assert_eq!(m.block_reads, 3);
        assert!(BlockStore::new(1).is_err());
    }
}
