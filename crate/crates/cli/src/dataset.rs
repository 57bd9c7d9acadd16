//! Dataset files: CSV lines `value,color_label`, `#` starts a comment.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use colorrange::{normalize_input, ColorRemap, ColoredPoint};

/// Points sorted by value with dense color ids, plus the label table.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<ColoredPoint>,
    pub colors: ColorRemap<String>,
}

impl Dataset {
    pub fn load(path: &Path) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)
            .with_context(|| format!("opening dataset {}", path.display()))?;
        let mut raw = Vec::new();
        for rec in rdr.records() {
            let rec = rec.with_context(|| format!("reading {}", path.display()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 2 {
                bail!(
                    "{}:{line}: expected `value,color_label`, found {} fields",
                    path.display(),
                    rec.len()
                );
            }
            let value: u64 = rec[0]
                .parse()
                .with_context(|| format!("{}:{line}: bad value {:?}", path.display(), &rec[0]))?;
            raw.push((value, rec[1].to_string()));
        }
        let (points, colors) =
            normalize_input(raw).with_context(|| format!("loading {}", path.display()))?;
        Ok(Dataset { points, colors })
    }
}

/// Writes `(value, label)` rows in the given order after `header` comments.
pub fn write_csv<'a>(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = (u64, &'a str)>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for h in header {
        writeln!(out, "# {h}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for (v, label) in rows {
        w.write_record([v.to_string().as_str(), label])?;
    }
    w.flush()?;
    Ok(())
}
