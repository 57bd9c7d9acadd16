//! Workload files: one operation per line, `#` comments.
//!
//! ```text
//! I <value> <color label>   insert
//! D <value>                 delete
//! Q <a> <b>                 report the distinct colors in [a, b]
//! K <a> <b> <k>             the k leftmost colors of [a, b]
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Insert(u64, String),
    Delete(u64),
    Query(u64, u64),
    KLeftmost(u64, u64, usize),
}

impl Op {
    pub fn is_update(&self) -> bool {
        matches!(self, Op::Insert(..) | Op::Delete(_))
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Insert(v, c) => write!(f, "I {v} {c}"),
            Op::Delete(v) => write!(f, "D {v}"),
            Op::Query(a, b) => write!(f, "Q {a} {b}"),
            Op::KLeftmost(a, b, k) => write!(f, "K {a} {b} {k}"),
        }
    }
}

pub fn parse_line(line: &str) -> Result<Option<Op>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let nums = |want: usize| -> Result<Vec<u64>> {
        let v: Vec<u64> = rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| anyhow!("bad number {t:?}")))
            .collect::<Result<_>>()?;
        if v.len() != want {
            bail!("`{tag}` takes {want} numbers, found {}", v.len());
        }
        Ok(v)
    };
    let op = match tag {
        "I" => {
            let (v, label) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| anyhow!("`I` takes a value and a color label"))?;
            let v = v.parse().map_err(|_| anyhow!("bad number {v:?}"))?;
            Op::Insert(v, label.trim().to_string())
        }
        "D" => Op::Delete(nums(1)?[0]),
        "Q" => {
            let v = nums(2)?;
            Op::Query(v[0], v[1])
        }
        "K" => {
            let v = nums(3)?;
            Op::KLeftmost(v[0], v[1], v[2] as usize)
        }
        _ => bail!("unknown operation {tag:?}"),
    };
    Ok(Some(op))
}

pub fn load(path: &Path) -> Result<Vec<Op>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading workload {}", path.display()))?;
    let mut ops = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(op) =
            parse_line(line).with_context(|| format!("{}:{}", path.display(), i + 1))?
        {
            ops.push(op);
        }
    }
    Ok(ops)
}

pub fn render(header: &[String], ops: &[Op]) -> String {
    let mut s = String::new();
    for h in header {
        s.push_str("# ");
        s.push_str(h);
        s.push('\n');
    }
    for op in ops {
        s.push_str(&op.to_string());
        s.push('\n');
    }
    s
}

/// Operation counts for a generated workload.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mix {
    pub queries: usize,
    pub k_queries: usize,
    pub inserts: usize,
    pub deletes: usize,
    pub k_max: usize,
}

/// A query range inside `[1, u]` with log-uniform width.
pub fn random_range(r: &mut impl Rng, u: u64) -> (u64, u64) {
    let a = r.gen_range(1..=u);
    let bits = r.gen_range(0..=64 - u.leading_zeros());
    let w = if bits == 0 {
        0
    } else {
        r.gen_range(0..1u64 << (bits - 1).min(62))
    };
    (a, a.saturating_add(w).min(u))
}

/// Shuffled operations over a universe `[1, u]` starting from `present`.
/// Deletes pick stored values and inserts fresh ones, so every update
/// succeeds when replayed in order.
pub fn generate(
    r: &mut impl Rng,
    present: &BTreeSet<u64>,
    u: u64,
    colors: &[String],
    mix: Mix,
) -> Vec<Op> {
    let mut kinds: Vec<u8> = [
        (0u8, mix.queries),
        (1, mix.k_queries),
        (2, mix.inserts),
        (3, mix.deletes),
    ]
    .iter()
    .flat_map(|&(k, n)| std::iter::repeat_n(k, n))
    .collect();
    rand::seq::SliceRandom::shuffle(kinds.as_mut_slice(), r);
    let mut set = present.clone();
    let mut ops = Vec::with_capacity(kinds.len());
    for kind in kinds {
        match kind {
            0 => {
                let (a, b) = random_range(r, u);
                ops.push(Op::Query(a, b));
            }
            1 => {
                let (a, b) = random_range(r, u);
                ops.push(Op::KLeftmost(a, b, r.gen_range(0..=mix.k_max)));
            }
            2 => {
                if set.len() as u64 >= u {
                    continue;
                }
                let v = loop {
                    let v = r.gen_range(1..=u);
                    if !set.contains(&v) {
                        break v;
                    }
                };
                set.insert(v);
                let c = &colors[r.gen_range(0..colors.len())];
                ops.push(Op::Insert(v, c.clone()));
            }
            _ => {
                let x = r.gen_range(1..=u);
                let Some(&v) = set.range(x..).next().or_else(|| set.range(..x).next_back()) else {
                    continue;
                };
                set.remove(&v);
                ops.push(Op::Delete(v));
            }
        }
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lines_round_trip() {
        let ops = vec![
            Op::Insert(7, "dark red".into()),
            Op::Delete(7),
            Op::Query(1, 40),
            Op::KLeftmost(3, 9, 2),
        ];
        let text = render(&["seed 1".into()], &ops);
        let back: Vec<Op> = text
            .lines()
            .filter_map(|l| parse_line(l).unwrap())
            .collect();
        assert_eq!(back, ops);
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in ["X 1", "Q 1", "Q 1 2 3", "D x", "I 5", "K 1 2"] {
            assert!(parse_line(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_line("  # note").unwrap(), None);
    }

    #[test]
    fn generated_updates_are_valid() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let start: BTreeSet<u64> = (1..=20).collect();
        let mix = Mix {
            queries: 50,
            k_queries: 10,
            inserts: 30,
            deletes: 30,
            k_max: 4,
        };
        let ops = generate(&mut r, &start, 100, &["a".into(), "b".into()], mix);
        let mut set = start;
        for op in &ops {
            match op {
                Op::Insert(v, _) => assert!(set.insert(*v)),
                Op::Delete(v) => assert!(set.remove(v)),
                Op::Query(a, b) | Op::KLeftmost(a, b, _) => assert!(1 <= *a && a <= b && *b <= 100),
            }
        }
        assert_eq!(ops.len(), 120);
    }
}
