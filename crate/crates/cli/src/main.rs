use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use colorrange::{ColorIndex, EmIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

mod bench;
mod dataset;
mod generate;
mod index;
mod verify;
mod workload;

use dataset::Dataset;
use index::{AnyIndex, Kind};

/// Color range reporting: generate data, build indexes, check them against
/// the brute-force oracle and measure their costs.
#[derive(Parser)]
#[command(name = "colorrange", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random dataset (CSV `value,color_label`) and optionally a workload.
    Generate(GenerateArgs),
    /// Build an index from a dataset; the `em` index is written to a file.
    Build(BuildArgs),
    /// Replay a workload on an index and the oracle in lockstep.
    Verify(VerifyArgs),
    /// Measure per-query costs and print a JSON table.
    Bench(BenchArgs),
    /// Load an external-memory index file, audit it and re-serialize it.
    Dump(DumpArgs),
}

#[derive(Args)]
struct IndexOpts {
    #[arg(long, value_enum, default_value = "static")]
    index: Kind,
    /// Records per block for the external-memory index.
    #[arg(long, default_value_t = 64)]
    block_size: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of points.
    #[arg(short, long)]
    n: usize,
    /// Values are drawn from [1, U].
    #[arg(short, long)]
    universe: u64,
    /// Number of colors.
    #[arg(short, long)]
    colors: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    skew: generate::Skew,
    #[arg(long, default_value_t = 1.0)]
    zipf_exponent: f64,
    /// Dataset output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write a workload file here.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    /// k-leftmost queries (need `--index slow` or `dynamic` to replay).
    #[arg(long, default_value_t = 0)]
    k_queries: usize,
    #[arg(long, default_value_t = 0)]
    inserts: usize,
    #[arg(long, default_value_t = 0)]
    deletes: usize,
    /// Largest `k` of a k-leftmost query.
    #[arg(long, default_value_t = 8)]
    k_max: usize,
}

#[derive(Args)]
struct BuildArgs {
    dataset: PathBuf,
    #[command(flatten)]
    index: IndexOpts,
    /// Index file (external-memory index only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    dataset: PathBuf,
    workload: PathBuf,
    #[command(flatten)]
    index: IndexOpts,
    /// Fault injection: drop one color from every answer with two or more.
    #[arg(long)]
    corrupt: bool,
    /// Audit the structure after every N updates (0 disables).
    #[arg(long, default_value_t = 1000)]
    audit_every: usize,
    /// Where to write the minimized reproducer on failure (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    dataset: PathBuf,
    workload: PathBuf,
    #[command(flatten)]
    index: IndexOpts,
    /// Worker threads for read-only workloads on static indexes.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// JSON output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    file: PathBuf,
    /// Write the re-serialized index here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let params = generate::Params {
        n: a.n,
        universe: a.universe,
        colors: a.colors,
        skew: a.skew,
        zipf_exponent: a.zipf_exponent,
    };
    let mut r = ChaCha8Rng::seed_from_u64(a.seed);
    let rows = generate::dataset(&mut r, &params)?;
    let labels = generate::color_labels(a.colors);
    let skew = match a.skew {
        generate::Skew::Uniform => "uniform".to_string(),
        generate::Skew::Zipf => format!("zipf s={}", a.zipf_exponent),
    };
    let header = vec![format!(
        "colorrange generate seed={} n={} u={} colors={} skew={skew}",
        a.seed, a.n, a.universe, a.colors
    )];
    dataset::write_csv(
        &a.out,
        &header,
        rows.iter().map(|&(v, c)| (v, labels[c].as_str())),
    )?;
    if let Some(path) = a.workload {
        // A separate stream keeps the dataset unchanged by workload options.
        let mut wr = ChaCha8Rng::seed_from_u64(a.seed);
        wr.set_stream(1);
        let present: BTreeSet<u64> = rows.iter().map(|r| r.0).collect();
        let mix = workload::Mix {
            queries: a.queries,
            k_queries: a.k_queries,
            inserts: a.inserts,
            deletes: a.deletes,
            k_max: a.k_max,
        };
        let ops = workload::generate(&mut wr, &present, a.universe, &labels, mix);
        let header = vec![format!(
            "colorrange workload seed={} for {} (queries={} k_queries={} inserts={} deletes={} k_max={})",
            a.seed,
            a.out.display(),
            a.queries,
            a.k_queries,
            a.inserts,
            a.deletes,
            a.k_max
        )];
        fs::write(&path, workload::render(&header, &ops))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let data = Dataset::load(&a.dataset)?;
    let kind = a.index.index;
    if a.out.is_some() && kind != Kind::Em {
        bail!("only the em index has a file format; drop --out or use --index em");
    }
    let start = Instant::now();
    let ix = AnyIndex::build(kind, &data.points, a.index.block_size)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut info = json!({
        "schema": bench::SCHEMA,
        "index": kind.name(),
        "n": data.points.len(),
        "colors": data.colors.len(),
        "build_ms": build_ms,
    });
    match &ix {
        AnyIndex::Static(st) => {
            info["leaf_size"] = json!(st.leaf_size());
            info["leaves"] = json!(st.leaf_count());
            info["list_entries"] = json!(st.list_storage());
        }
        AnyIndex::Dynamic(dy) => {
            info["height"] = json!(dy.tree().height());
            info["leaf_param"] = json!(dy.tree().leaf_param());
        }
        AnyIndex::Slow(sl) => {
            info["height"] = json!(sl.height());
        }
        AnyIndex::Em(em) => {
            info["block_size"] = json!(em.block_size());
            info["blocks"] = json!(em.block_count());
            info["leaf_size"] = json!(em.leaf_size());
            info["list_cap"] = json!(em.list_cap());
            if let Some(out) = &a.out {
                let bytes = em.to_bytes();
                fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
                info["file"] = json!(out.display().to_string());
                info["bytes"] = json!(bytes.len());
            }
        }
    }
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&info)?))
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let data = Dataset::load(&a.dataset)?;
    let ops = workload::load(&a.workload)?;
    let setup = verify::Setup {
        kind: a.index.index,
        block_size: a.index.block_size,
        points: &data.points,
        colors: &data.colors,
        corrupt: a.corrupt,
        audit_every: a.audit_every,
    };
    let res = verify::replay(&setup, &ops, true)?;
    let kind = setup.kind.name();
    let n = data.points.len();
    let Some(d) = res.divergence else {
        println!(
            "PASS {kind} index, N={n}: {} ops ({} queries, {} updates, {} audits) match the oracle",
            ops.len(),
            res.queries,
            res.updates,
            res.audits
        );
        return Ok(true);
    };
    println!(
        "FAIL {kind} index, N={n}: op {} `{}`: {}",
        d.index + 1,
        d.op,
        d.detail
    );
    let repro = verify::minimize(&setup, &ops, &d)?;
    let mut flags = format!("--index {kind}");
    if setup.kind == Kind::Em {
        flags.push_str(&format!(" --block-size {}", setup.block_size));
    }
    if a.corrupt {
        flags.push_str(" --corrupt");
    }
    let header = vec![
        format!(
            "reproducer for dataset {} with {flags}",
            a.dataset.display()
        ),
        format!(
            "minimized from the first {} ops of {}",
            d.index + 1,
            a.workload.display()
        ),
    ];
    let text = workload::render(&header, &repro);
    match &a.out {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            println!(
                "reproducer: {} ops, written to {}",
                repro.len(),
                p.display()
            );
        }
        None => {
            println!("reproducer: {} ops", repro.len());
            print!("{text}");
        }
    }
    Ok(false)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let data = Dataset::load(&a.dataset)?;
    let ops = workload::load(&a.workload)?;
    if a.threads == 0 {
        bail!("--threads must be at least 1");
    }
    let ix = AnyIndex::build(a.index.index, &data.points, a.index.block_size)?;
    let table = bench::run(ix, &data.points, &data.colors, &ops, a.threads)?;
    emit(
        a.out.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&table)?),
    )
}

fn cmd_dump(a: DumpArgs) -> Result<()> {
    let bytes = fs::read(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let em =
        EmIndex::from_bytes(&bytes).with_context(|| format!("loading {}", a.file.display()))?;
    let again = em.to_bytes();
    if let Some(out) = &a.out {
        fs::write(out, &again).with_context(|| format!("writing {}", out.display()))?;
    }
    let info = json!({
        "schema": bench::SCHEMA,
        "file": a.file.display().to_string(),
        "bytes": bytes.len(),
        "n": em.len(),
        "colors": em.palette(),
        "block_size": em.block_size(),
        "blocks": em.block_count(),
        "leaf_size": em.leaf_size(),
        "list_cap": em.list_cap(),
        "leaves": em.leaf_count(),
        "nodes": em.node_count(),
        "round_trip_identical": again == bytes,
    });
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&info)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a).map(|_| true),
        Cmd::Build(a) => cmd_build(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a).map(|_| true),
        Cmd::Dump(a) => cmd_dump(a).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
