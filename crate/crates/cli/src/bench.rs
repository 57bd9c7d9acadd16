//! Per-query cost records and summary medians.

use std::time::Instant;

use anyhow::Result;
use colorrange::{ColorRemap, ColoredPoint, QueryScratch};
use serde::Serialize;

use crate::index::AnyIndex;
use crate::verify::check_supported;
use crate::workload::Op;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRecord {
    pub index: &'static str,
    pub n: usize,
    pub block_size: Option<usize>,
    /// `"Q"` or `"K"`.
    pub op: &'static str,
    pub a: u64,
    pub b: u64,
    /// The `k` argument of a k-leftmost query.
    pub k_arg: Option<usize>,
    /// Colors reported.
    pub k: usize,
    pub touches: u64,
    pub locate_ops: u64,
    pub block_reads: u64,
    pub locate_reads: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    /// Answer sizes in `[k_min, k_max]`.
    pub k_min: usize,
    pub k_max: usize,
    pub queries: usize,
    pub median_touches_per_k1: f64,
    /// External memory only: median `block_reads / (1 + k/B)`.
    pub median_block_reads_per_kb: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub schema: u32,
    pub index: &'static str,
    pub n: usize,
    pub block_size: Option<usize>,
    pub threads: usize,
    pub updates_replayed: usize,
    pub records: Vec<BenchRecord>,
    pub summary: Vec<SummaryRow>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Rows bucketed by answer size: `{0}`, `{1}`, `[2, 3]`, `[4, 7]`, ...
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let bucket = |k: usize| if k == 0 { 0 } else { k.ilog2() as usize + 1 };
    let nb = records.iter().map(|r| bucket(r.k) + 1).max().unwrap_or(0);
    (0..nb)
        .filter_map(|j| {
            let rows: Vec<&BenchRecord> = records.iter().filter(|r| bucket(r.k) == j).collect();
            if rows.is_empty() {
                return None;
            }
            let (k_min, k_max) = if j == 0 {
                (0, 0)
            } else {
                (1 << (j - 1), (1 << j) - 1)
            };
            let mut t: Vec<f64> = rows
                .iter()
                .map(|r| r.touches as f64 / (r.k + 1) as f64)
                .collect();
            let io = rows[0].block_size.map(|bs| {
                let mut v: Vec<f64> = rows
                    .iter()
                    .map(|r| r.block_reads as f64 / (1.0 + r.k as f64 / bs as f64))
                    .collect();
                median(&mut v)
            });
            Some(SummaryRow {
                k_min,
                k_max,
                queries: rows.len(),
                median_touches_per_k1: median(&mut t),
                median_block_reads_per_kb: io,
            })
        })
        .collect()
}

fn measure(
    index: &AnyIndex,
    n: usize,
    op: &Op,
    scratch: &mut QueryScratch,
) -> Result<Option<BenchRecord>> {
    scratch.meter.reset();
    let start = Instant::now();
    let (tag, a, b, k_arg, k) = match *op {
        Op::Query(a, b) => ("Q", a, b, None, index.query(a, b, scratch)?.len()),
        Op::KLeftmost(a, b, k) => (
            "K",
            a,
            b,
            Some(k),
            index.k_leftmost(a, b, k, &mut scratch.meter)?.len(),
        ),
        _ => return Ok(None),
    };
    let wall_nanos = start.elapsed().as_nanos() as u64;
    let m = scratch.meter;
    Ok(Some(BenchRecord {
        index: index.kind().name(),
        n,
        block_size: index.block_size(),
        op: tag,
        a,
        b,
        k_arg,
        k,
        touches: m.touches,
        locate_ops: m.locate_ops,
        block_reads: m.block_reads,
        locate_reads: m.locate_reads,
        wall_nanos,
    }))
}

/// Runs the workload. Read-only workloads on indexes other than the dynamic
/// one are split across `threads` workers, each with its own meter; records
/// come back in workload order either way.
pub fn run(
    mut index: AnyIndex,
    points: &[ColoredPoint],
    colors: &ColorRemap<String>,
    ops: &[Op],
    threads: usize,
) -> Result<BenchTable> {
    check_supported(index.kind(), ops)?;
    let n = points.len();
    let palette = colors.len();
    let has_updates = ops.iter().any(Op::is_update);
    let parallel = threads > 1 && !has_updates && index.kind() != crate::index::Kind::Dynamic;
    let mut records = Vec::new();
    let mut updates = 0;
    let used_threads = if parallel {
        let chunk = ops.len().div_ceil(threads).max(1);
        let ix = &index;
        let parts: Vec<Result<Vec<BenchRecord>>> = std::thread::scope(|s| {
            let handles: Vec<_> = ops
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut scratch = QueryScratch::new(palette);
                        let mut out = Vec::with_capacity(part.len());
                        for op in part {
                            out.extend(measure(ix, n, op, &mut scratch)?);
                        }
                        Ok(out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench worker panicked"))
                .collect()
        });
        for p in parts {
            records.extend(p?);
        }
        threads
    } else {
        let mut colors = colors.clone();
        let mut scratch = QueryScratch::new(palette);
        let mut live = n;
        for op in ops {
            match op {
                Op::Insert(v, label) => {
                    let c = colors.intern(label.clone());
                    if index.insert(ColoredPoint::new(*v, c)).is_ok() {
                        live += 1;
                    }
                    updates += 1;
                }
                Op::Delete(v) => {
                    if index.delete(*v).is_ok() {
                        live -= 1;
                    }
                    updates += 1;
                }
                _ => records.extend(measure(&index, live, op, &mut scratch)?),
            }
        }
        1
    };
    let summary = summarize(&records);
    Ok(BenchTable {
        schema: SCHEMA,
        index: index.kind().name(),
        n,
        block_size: index.block_size(),
        threads: used_threads,
        updates_replayed: updates,
        records,
        summary,
    })
}
