//! Lockstep replay of a workload on an index and the brute-force oracle.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Result};
use colorrange::{
    oracle_k_leftmost, oracle_report, Color, ColorRemap, ColoredPoint, CostMeter, Error,
    QueryScratch, Range,
};

use crate::index::{AnyIndex, Kind};
use crate::workload::Op;

#[derive(Debug, Clone, Copy)]
pub struct Setup<'a> {
    pub kind: Kind,
    pub block_size: usize,
    pub points: &'a [ColoredPoint],
    pub colors: &'a ColorRemap<String>,
    /// Drop the last color of every answer with two or more colors.
    pub corrupt: bool,
    /// Full structural audit after every this many updates (0 = never).
    pub audit_every: usize,
}

#[derive(Debug, Clone)]
pub struct Divergence {
    /// Position of the offending operation in the replayed list.
    pub index: usize,
    pub op: Op,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Replay {
    pub queries: usize,
    pub updates: usize,
    pub audits: usize,
    pub divergence: Option<Divergence>,
}

/// Rejects workloads the index kind cannot run.
pub fn check_supported(kind: Kind, ops: &[Op]) -> Result<()> {
    if !kind.supports_updates() && ops.iter().any(Op::is_update) {
        bail!(
            "the {} index does not support updates; the workload contains `I`/`D` operations (use --index dynamic or slow)",
            kind.name()
        );
    }
    if !kind.supports_selection() && ops.iter().any(|o| matches!(o, Op::KLeftmost(..))) {
        bail!(
            "the {} index has no k-leftmost selection; the workload contains `K` operations",
            kind.name()
        );
    }
    Ok(())
}

/// Reference state: a value -> color map and its sorted point list.
struct Model {
    map: BTreeMap<u64, Color>,
    sorted: Vec<ColoredPoint>,
    dirty: bool,
}

impl Model {
    fn points(&mut self) -> &[ColoredPoint] {
        if self.dirty {
            self.sorted = self
                .map
                .iter()
                .map(|(&v, &c)| ColoredPoint::new(v, c))
                .collect();
            self.dirty = false;
        }
        &self.sorted
    }
}

fn show(colors: &ColorRemap<String>, set: &[Color]) -> String {
    let labels: Vec<&str> = set
        .iter()
        .map(|&c| colors.label(c).map_or("?", |s| s.as_str()))
        .collect();
    format!("{{{}}}", labels.join(", "))
}

fn show_result<T: std::fmt::Debug>(r: &Result<T, Error>) -> String {
    match r {
        Ok(v) => format!("ok {v:?}"),
        Err(e) => format!("error `{e}`"),
    }
}

/// Replays `ops` from the initial points and stops at the first divergence.
/// With `final_audit` the structure is audited once more at the end.
pub fn replay(setup: &Setup, ops: &[Op], final_audit: bool) -> Result<Replay> {
    check_supported(setup.kind, ops)?;
    let mut colors = setup.colors.clone();
    let mut index = AnyIndex::build(setup.kind, setup.points, setup.block_size)?;
    let mut model = Model {
        map: setup.points.iter().map(|p| (p.value, p.color)).collect(),
        sorted: setup.points.to_vec(),
        dirty: false,
    };
    let mut scratch = QueryScratch::new(colors.len());
    let mut out = Replay::default();
    let audit = |index: &AnyIndex, out: &mut Replay, i: usize, op: &Op| {
        out.audits += 1;
        index.audit().err().map(|e| Divergence {
            index: i,
            op: op.clone(),
            detail: format!("structural audit failed: {e}"),
        })
    };
    for (i, op) in ops.iter().enumerate() {
        let diverged = |detail: String| Divergence {
            index: i,
            op: op.clone(),
            detail,
        };
        let failure = match op {
            Op::Insert(v, label) => {
                out.updates += 1;
                let p = ColoredPoint::new(*v, colors.intern(label.clone()));
                let want = if *v == 0 {
                    Err(Error::ZeroCoordinate)
                } else if model.map.contains_key(v) {
                    Err(Error::DuplicateCoordinate(*v))
                } else {
                    Ok(())
                };
                let got = index.insert(p);
                if got.is_ok() {
                    model.map.insert(p.value, p.color);
                    model.dirty = true;
                }
                (got != want).then(|| {
                    diverged(format!(
                        "insert: expected {}, got {}",
                        show_result(&want),
                        show_result(&got)
                    ))
                })
            }
            Op::Delete(v) => {
                out.updates += 1;
                let want = model.map.get(v).copied().ok_or(Error::NotFound(*v));
                let got = index.delete(*v);
                if got.is_ok() {
                    model.map.remove(v);
                    model.dirty = true;
                }
                (got != want).then(|| {
                    diverged(format!(
                        "delete: expected {}, got {}",
                        show_result(&want),
                        show_result(&got)
                    ))
                })
            }
            Op::Query(a, b) => {
                out.queries += 1;
                let got = index.query(*a, *b, &mut scratch);
                match Range::new(*a, *b) {
                    Err(_) => got
                        .is_ok()
                        .then(|| diverged("inverted range accepted by the index".to_string())),
                    Ok(r) => {
                        let want = oracle_report(model.points(), r);
                        let mut got = match got {
                            Ok(got) => got,
                            Err(e) => {
                                out.divergence = Some(diverged(format!("query failed: {e}")));
                                return Ok(out);
                            }
                        };
                        if setup.corrupt && got.len() >= 2 {
                            got.pop();
                        }
                        let set: BTreeSet<Color> = got.iter().copied().collect();
                        if set.len() != got.len() {
                            Some(diverged(format!(
                                "query reported a color twice: {}",
                                show(&colors, &got)
                            )))
                        } else {
                            (set != want).then(|| {
                                let missing: Vec<Color> = want.difference(&set).copied().collect();
                                let extra: Vec<Color> = set.difference(&want).copied().collect();
                                diverged(format!(
                                    "query: expected {} colors, got {}; missing {}, unexpected {}",
                                    want.len(),
                                    set.len(),
                                    show(&colors, &missing),
                                    show(&colors, &extra)
                                ))
                            })
                        }
                    }
                }
            }
            Op::KLeftmost(a, b, k) => {
                out.queries += 1;
                let mut m = CostMeter::default();
                let mut got = index.k_leftmost(*a, *b, *k, &mut m)?;
                if setup.corrupt && got.len() >= 2 {
                    got.pop();
                }
                let want = match Range::new(*a, *b) {
                    Ok(r) => oracle_k_leftmost(model.points(), r, *k),
                    Err(_) => Vec::new(),
                };
                (got != want).then(|| {
                    diverged(format!(
                        "k-leftmost: expected {}, got {}",
                        show(&colors, &want),
                        show(&colors, &got)
                    ))
                })
            }
        };
        let failure = failure.or_else(|| {
            let due = op.is_update()
                && setup.audit_every > 0
                && out.updates.is_multiple_of(setup.audit_every);
            if due {
                audit(&index, &mut out, i, op)
            } else {
                None
            }
        });
        if failure.is_some() {
            out.divergence = failure;
            return Ok(out);
        }
    }
    if final_audit {
        if let Some(last) = ops.last() {
            out.divergence = audit(&index, &mut out, ops.len() - 1, last);
        }
    }
    Ok(out)
}

/// Shortest reproducer found by bisecting the workload prefix: the updates
/// of the first `p` operations followed by the failing operation, for the
/// smallest `p` that still diverges.
pub fn minimize(setup: &Setup, ops: &[Op], failure: &Divergence) -> Result<Vec<Op>> {
    let last = ops[failure.index].clone();
    let candidate = |p: usize| -> Vec<Op> {
        ops[..p]
            .iter()
            .filter(|o| o.is_update())
            .cloned()
            .chain(std::iter::once(last.clone()))
            .collect()
    };
    let fails =
        |p: usize| -> Result<bool> { Ok(replay(setup, &candidate(p), true)?.divergence.is_some()) };
    let (mut lo, mut hi) = (0, failure.index);
    if !fails(hi)? {
        return Ok(ops[..=failure.index].to_vec());
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if fails(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidate(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use colorrange::normalize_input;

    fn sample() -> (Vec<ColoredPoint>, ColorRemap<String>) {
        let rows = [
            (1, "R"),
            (3, "B"),
            (5, "R"),
            (7, "G"),
            (9, "B"),
            (12, "R"),
            (15, "G"),
            (20, "B"),
        ];
        normalize_input(rows.iter().map(|&(v, c)| (v, c.to_string()))).unwrap()
    }

    #[test]
    fn clean_replay_passes_for_every_kind() {
        let (pts, colors) = sample();
        let ops = vec![Op::Query(4, 20), Op::Query(8, 8), Op::Query(1, 3)];
        for kind in [Kind::Static, Kind::Dynamic, Kind::Slow, Kind::Em] {
            let setup = Setup {
                kind,
                block_size: 4,
                points: &pts,
                colors: &colors,
                corrupt: false,
                audit_every: 1,
            };
            let r = replay(&setup, &ops, true).unwrap();
            assert!(r.divergence.is_none(), "{kind:?}: {:?}", r.divergence);
            assert_eq!(r.queries, 3);
        }
    }

    #[test]
    fn corruption_is_caught_and_minimized() {
        let (pts, colors) = sample();
        let setup = Setup {
            kind: Kind::Dynamic,
            block_size: 4,
            points: &pts,
            colors: &colors,
            corrupt: true,
            audit_every: 0,
        };
        let ops = vec![
            Op::Query(1, 1),
            Op::Insert(2, "Y".into()),
            Op::Query(2, 2),
            Op::Delete(20),
            Op::Query(1, 2),
        ];
        let r = replay(&setup, &ops, false).unwrap();
        let d = r.divergence.unwrap();
        assert_eq!(d.index, 4);
        // [1, 2] holds two colors only once 2 is inserted.
        let repro = minimize(&setup, &ops, &d).unwrap();
        assert_eq!(repro, vec![Op::Insert(2, "Y".into()), Op::Query(1, 2)]);
    }

    #[test]
    fn static_kinds_reject_updates() {
        assert!(check_supported(Kind::Static, &[Op::Delete(1)]).is_err());
        assert!(check_supported(Kind::Em, &[Op::KLeftmost(1, 2, 1)]).is_err());
        assert!(check_supported(Kind::Slow, &[Op::KLeftmost(1, 2, 1)]).is_ok());
    }
}
