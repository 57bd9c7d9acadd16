//! Deterministic synthetic datasets.

use anyhow::{bail, Result};
use clap::ValueEnum;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Skew {
    /// Every color equally likely.
    Uniform,
    /// Color `i` drawn with weight `1 / (i + 1)^s`.
    Zipf,
}

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub n: usize,
    pub universe: u64,
    pub colors: usize,
    pub skew: Skew,
    pub zipf_exponent: f64,
}

pub fn color_labels(colors: usize) -> Vec<String> {
    (0..colors).map(|i| format!("c{i}")).collect()
}

/// `n` distinct values from `[1, universe]` in random order, each with a
/// label index in `0..colors`.
pub fn dataset(r: &mut impl Rng, p: &Params) -> Result<Vec<(u64, usize)>> {
    if p.colors == 0 {
        bail!("need at least one color");
    }
    if p.universe == 0 || p.n as u64 > p.universe {
        bail!("need 1 <= N <= U (got N={}, U={})", p.n, p.universe);
    }
    let Ok(u) = usize::try_from(p.universe) else {
        bail!(
            "U={} does not fit this platform's address width",
            p.universe
        );
    };
    if !(p.zipf_exponent.is_finite() && p.zipf_exponent >= 0.0) {
        bail!("zipf exponent must be a finite number >= 0");
    }
    let weights: Vec<f64> = match p.skew {
        Skew::Uniform => vec![1.0; p.colors],
        Skew::Zipf => (0..p.colors)
            .map(|i| ((i + 1) as f64).powf(-p.zipf_exponent))
            .collect(),
    };
    let pick = WeightedIndex::new(&weights)?;
    let values = rand::seq::index::sample(r, u, p.n);
    Ok(values
        .into_iter()
        .map(|i| (i as u64 + 1, pick.sample(r)))
        .collect())
}
