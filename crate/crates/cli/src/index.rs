//! One handle over the four index kinds, with metered queries.

use anyhow::{bail, Result};
use clap::ValueEnum;
use colorrange::{
    Color, ColoredPoint, CostMeter, DynIndex, EmIndex, QueryScratch, SlowIndex, StaticIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Static,
    Dynamic,
    Slow,
    Em,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Static => "static",
            Kind::Dynamic => "dynamic",
            Kind::Slow => "slow",
            Kind::Em => "em",
        }
    }

    pub fn supports_updates(self) -> bool {
        matches!(self, Kind::Dynamic | Kind::Slow)
    }

    /// k-leftmost selection comes from the slow structure (the dynamic
    /// index keeps one as its fallback).
    pub fn supports_selection(self) -> bool {
        self.supports_updates()
    }
}

pub enum AnyIndex {
    Static(StaticIndex),
    Dynamic(Box<DynIndex>),
    Slow(SlowIndex),
    Em(EmIndex),
}

impl AnyIndex {
    pub fn build(kind: Kind, points: &[ColoredPoint], block_size: usize) -> Result<AnyIndex> {
        Ok(match kind {
            Kind::Static => AnyIndex::Static(StaticIndex::build(points)?),
            Kind::Dynamic => AnyIndex::Dynamic(Box::new(DynIndex::build(points)?)),
            Kind::Slow => AnyIndex::Slow(SlowIndex::build(points)?),
            Kind::Em => AnyIndex::Em(EmIndex::build(points, block_size)?),
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            AnyIndex::Static(_) => Kind::Static,
            AnyIndex::Dynamic(_) => Kind::Dynamic,
            AnyIndex::Slow(_) => Kind::Slow,
            AnyIndex::Em(_) => Kind::Em,
        }
    }

    /// Colors of `[a, b]` as the index emits them (the external-memory
    /// stream is not deduplicated here), with costs in `scratch.meter`.
    pub fn query(&self, a: u64, b: u64, scratch: &mut QueryScratch) -> Result<Vec<Color>> {
        Ok(match self {
            AnyIndex::Static(ix) => ix.query_traced(a, b, scratch)?.0,
            AnyIndex::Dynamic(ix) => ix.query_traced(a, b, scratch)?.0,
            AnyIndex::Slow(ix) => ix
                .query_raw(a, b, &mut scratch.meter)?
                .into_iter()
                .map(|x| x.1)
                .collect(),
            AnyIndex::Em(ix) => ix.query_traced(a, b, &mut scratch.meter)?.0,
        })
    }

    pub fn k_leftmost(
        &self,
        a: u64,
        b: u64,
        k: usize,
        meter: &mut CostMeter,
    ) -> Result<Vec<Color>> {
        let slow = match self {
            AnyIndex::Slow(ix) => ix,
            AnyIndex::Dynamic(ix) => ix.slow(),
            _ => bail!(
                "the {} index has no k-leftmost selection",
                self.kind().name()
            ),
        };
        Ok(slow
            .k_leftmost_elems(a, b, k, meter)
            .into_iter()
            .map(|x| x.1)
            .collect())
    }

    pub fn insert(&mut self, p: ColoredPoint) -> colorrange::Result<()> {
        match self {
            AnyIndex::Dynamic(ix) => ix.insert(p),
            AnyIndex::Slow(ix) => ix.insert(p),
            _ => unreachable!("checked by supports_updates"),
        }
    }

    pub fn delete(&mut self, value: u64) -> colorrange::Result<Color> {
        match self {
            AnyIndex::Dynamic(ix) => ix.delete(value),
            AnyIndex::Slow(ix) => ix.delete(value),
            _ => unreachable!("checked by supports_updates"),
        }
    }

    pub fn audit(&self) -> Result<(), &'static str> {
        match self {
            AnyIndex::Dynamic(ix) => ix.check_invariants(),
            AnyIndex::Slow(ix) => ix.check_invariants(),
            AnyIndex::Em(ix) => ix.audit(),
            AnyIndex::Static(_) => Ok(()),
        }
    }

    pub fn block_size(&self) -> Option<usize> {
        match self {
            AnyIndex::Em(ix) => Some(ix.block_size()),
            _ => None,
        }
    }
}
