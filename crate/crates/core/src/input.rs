//! Ingestion: validation, dense color ids and prev-links.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{ColorRemap, ColoredPoint, PredLink, NO_PREV};

/// Sorts `points` by coordinate and maps labels to dense ids in order of
/// first appearance in the input.
pub fn normalize_input<L, I>(points: I) -> Result<(Vec<ColoredPoint>, ColorRemap<L>)>
where
    L: Ord + Clone,
    I: IntoIterator<Item = (u64, L)>,
{
    let mut remap = ColorRemap::new();
    let mut out = Vec::new();
    for (value, label) in points {
        if value == 0 {
            return Err(Error::ZeroCoordinate);
        }
        let color = remap.intern(label);
        out.push(ColoredPoint { value, color });
    }
    out.sort_unstable_by_key(|p| p.value);
    if let Some(w) = out.windows(2).find(|w| w[0].value == w[1].value) {
        return Err(Error::DuplicateCoordinate(w[0].value));
    }
    Ok((out, remap))
}

/// Checks that `points` is strictly increasing, nonzero and within `colors`.
pub fn validate_sorted(points: &[ColoredPoint], colors: usize) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if p.value == 0 {
            return Err(Error::ZeroCoordinate);
        }
        if i > 0 && points[i - 1].value >= p.value {
            return Err(if points[i - 1].value == p.value {
                Error::DuplicateCoordinate(p.value)
            } else {
                Error::InvalidParameter("points not sorted by value")
            });
        }
        if p.color as usize >= colors {
            return Err(Error::UnknownColor(p.color));
        }
    }
    Ok(())
}

/// `prev(e)` for every point of a sorted, duplicate-free slice.
pub fn compute_prev(points: &[ColoredPoint]) -> Vec<PredLink> {
    let palette = palette_size(points);
    let mut last = alloc::vec![NO_PREV; palette];
    points
        .iter()
        .map(|p| core::mem::replace(&mut last[p.color as usize], p.value))
        .collect()
}

/// Same-color successor of every point, `u64::MAX` when none.
pub fn compute_next(points: &[ColoredPoint]) -> Vec<u64> {
    let palette = palette_size(points);
    let mut next_seen = alloc::vec![u64::MAX; palette];
    let mut out = alloc::vec![u64::MAX; points.len()];
    for (i, p) in points.iter().enumerate().rev() {
        out[i] = core::mem::replace(&mut next_seen[p.color as usize], p.value);
    }
    out
}

/// One more than the largest color id present.
pub fn palette_size(points: &[ColoredPoint]) -> usize {
    points
        .iter()
        .map(|p| p.color as usize + 1)
        .max()
        .unwrap_or(0)
}

/// Number of distinct colors present.
pub fn distinct_colors(points: &[ColoredPoint]) -> usize {
    let mut seen = alloc::vec![false; palette_size(points)];
    points
        .iter()
        .filter(|p| !core::mem::replace(&mut seen[p.color as usize], true))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::sample;

    #[test]
    fn normalize_sorts_and_remaps() {
        let (pts, remap) = normalize_input([(5, "red"), (1, "red"), (3, "blue")]).unwrap();
        assert_eq!(
            pts,
            [
                ColoredPoint::new(1, 0),
                ColoredPoint::new(3, 1),
                ColoredPoint::new(5, 0)
            ]
        );
        assert_eq!(remap.id(&"red"), Some(0));
        assert_eq!(remap.id(&"blue"), Some(1));
    }

    #[test]
    fn normalize_empty_and_duplicates() {
        let (pts, remap) = normalize_input::<&str, _>([]).unwrap();
        assert!(pts.is_empty() && remap.is_empty());
        assert_eq!(
            normalize_input([(4, "x"), (4, "y")]),
            Err(Error::DuplicateCoordinate(4))
        );
        assert_eq!(normalize_input([(0, "x")]), Err(Error::ZeroCoordinate));
    }

    // Independent per-color backward scan.
    fn prev_by_scan(points: &[ColoredPoint]) -> Vec<u64> {
        (0..points.len())
            .map(|i| {
                points[..i]
                    .iter()
                    .rev()
                    .find(|q| q.color == points[i].color)
                    .map_or(0, |q| q.value)
            })
            .collect()
    }

    #[test]
    fn prev_links() {
        let pts = sample();
        assert_eq!(prev_by_scan(&pts), [0, 0, 1, 0, 3, 5, 7, 9]);
        assert_eq!(compute_prev(&pts), [0, 0, 1, 0, 3, 5, 7, 9]);
        assert_eq!(compute_prev(&[ColoredPoint::new(7, 2)]), [0]);
        let chain = [
            ColoredPoint::new(1, 0),
            ColoredPoint::new(2, 0),
            ColoredPoint::new(3, 0),
        ];
        assert_eq!(compute_prev(&chain), [0, 1, 2]);
        assert_eq!(compute_next(&chain), [2, 3, u64::MAX]);
    }

    #[test]
    fn validate_catches_bad_input() {
        let pts = sample();
        assert!(validate_sorted(&pts, 3).is_ok());
        assert_eq!(validate_sorted(&pts, 2), Err(Error::UnknownColor(2)));
        let dup = [ColoredPoint::new(2, 0), ColoredPoint::new(2, 0)];
        assert_eq!(validate_sorted(&dup, 1), Err(Error::DuplicateCoordinate(2)));
    }
}
