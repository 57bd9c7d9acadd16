//! Brute-force reference answers. Everything here scans the raw point list
//! and shares no code with the indexes.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::types::{Color, ColoredPoint, Range};

/// Distinct colors of points inside `q`.
pub fn oracle_report(points: &[ColoredPoint], q: Range) -> BTreeSet<Color> {
    points
        .iter()
        .filter(|p| q.contains(p.value))
        .map(|p| p.color)
        .collect()
}

/// First `k` distinct colors met scanning `q` left to right. `points` need
/// not be sorted.
pub fn oracle_k_leftmost(points: &[ColoredPoint], q: Range, k: usize) -> Vec<Color> {
    let mut inside: Vec<&ColoredPoint> = points.iter().filter(|p| q.contains(p.value)).collect();
    inside.sort_by_key(|p| p.value);
    first_distinct(inside.into_iter().map(|p| p.color), k)
}

/// First `k` distinct colors met scanning `q` right to left.
pub fn oracle_k_rightmost(points: &[ColoredPoint], q: Range, k: usize) -> Vec<Color> {
    let mut inside: Vec<&ColoredPoint> = points.iter().filter(|p| q.contains(p.value)).collect();
    inside.sort_by_key(|p| core::cmp::Reverse(p.value));
    first_distinct(inside.into_iter().map(|p| p.color), k)
}

fn first_distinct(colors: impl Iterator<Item = Color>, k: usize) -> Vec<Color> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in colors {
        if out.len() >= k {
            break;
        }
        if seen.insert(c) {
            out.push(c);
        }
    }
    out
}
