#![allow(dead_code)]

pub mod facts;

use std::collections::{BTreeMap, BTreeSet};

use colorrange::{Color, ColoredPoint};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct coordinates from `[1, u]`, sorted, colors uniform in `[0, c)`.
pub fn instance(rng: &mut ChaCha8Rng, n: usize, u: u64, c: u32) -> Vec<ColoredPoint> {
    let mut vals: Vec<u64> = sample(rng, u as usize, n)
        .into_iter()
        .map(|v| v as u64 + 1)
        .collect();
    vals.sort_unstable();
    vals.into_iter()
        .map(|v| ColoredPoint::new(v, rng.gen_range(0..c)))
        .collect()
}

/// A range with log-uniform width inside `[1, u]`.
pub fn random_range(rng: &mut ChaCha8Rng, u: u64) -> (u64, u64) {
    let bits = 64 - u.leading_zeros();
    let e = rng.gen_range(0..bits);
    let w = rng.gen_range(0..=(1u64 << e).min(u - 1));
    let a = rng.gen_range(1..=u - w);
    (a, a + w)
}

pub fn as_set(v: Vec<Color>) -> BTreeSet<Color> {
    v.into_iter().collect()
}

pub fn has_duplicates(v: &[Color]) -> bool {
    let mut s = BTreeSet::new();
    v.iter().any(|c| !s.insert(*c))
}

/// Reference answers from per-color coordinate sets: a color is present in
/// `[a, b]` iff its successor of `a` is at most `b`.
#[derive(Debug, Default, Clone)]
pub struct ColorSets {
    by_color: BTreeMap<Color, BTreeSet<u64>>,
    all: BTreeMap<u64, Color>,
}

impl ColorSets {
    pub fn new(points: &[ColoredPoint]) -> Self {
        let mut s = ColorSets::default();
        for p in points {
            s.insert(*p);
        }
        s
    }

    pub fn insert(&mut self, p: ColoredPoint) {
        self.all.insert(p.value, p.color);
        self.by_color.entry(p.color).or_default().insert(p.value);
    }

    pub fn delete(&mut self, v: u64) -> Option<Color> {
        let c = self.all.remove(&v)?;
        let set = self.by_color.get_mut(&c).expect("color set");
        set.remove(&v);
        if set.is_empty() {
            self.by_color.remove(&c);
        }
        Some(c)
    }

    pub fn contains(&self, v: u64) -> bool {
        self.all.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    /// The first stored coordinate at or after `x`, wrapping around.
    pub fn pick(&self, x: u64) -> Option<u64> {
        self.all
            .range(x..)
            .next()
            .or_else(|| self.all.iter().next())
            .map(|(&v, _)| v)
    }

    pub fn report(&self, a: u64, b: u64) -> BTreeSet<Color> {
        self.by_color
            .iter()
            .filter(|(_, s)| s.range(a..=b).next().is_some())
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn points(&self) -> Vec<ColoredPoint> {
        self.all
            .iter()
            .map(|(&v, &c)| ColoredPoint::new(v, c))
            .collect()
    }
}
