//! CSV emission and parsing plus atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e).with_context(|| format!("renaming into {}", path.display()));
    }
    Ok(())
}

const SERIES_COLUMNS: [&str; 3] = ["x", "y", "z"];

fn series_header(dims: usize) -> String {
    let mut header = String::from("i");
    for d in 0..dims {
        header.push(',');
        match SERIES_COLUMNS.get(d).filter(|_| dims == 3) {
            Some(name) => header.push_str(name),
            None => {
                let _ = write!(header, "v{}", d + 1);
            }
        }
    }
    header
}

/// `i,x,y,z` rows in shortest round-trip decimal.
pub fn format_series_csv<R: AsRef<[f64]>>(rows: &[R]) -> String {
    let dims = rows.first().map_or(3, |r| r.as_ref().len());
    let mut out = series_header(dims);
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in row.as_ref() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_series_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().context("reading series CSV header")?;
    if header.get(0) != Some("i") || header.len() < 2 {
        bail!("series CSV header must start with `i` and name at least one value column");
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.context("reading series CSV record")?;
        let line = record.position().map_or(0, |p| p.line());
        let index: usize = record[0]
            .parse()
            .with_context(|| format!("line {line}: bad index {:?}", &record[0]))?;
        if index != rows.len() {
            bail!("line {line}: expected index {}, found {index}", rows.len());
        }
        let values = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .with_context(|| format!("line {line}: bad value {f:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        bail!("series CSV has no rows");
    }
    Ok(rows)
}

pub fn read_series_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_series_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Test,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Test => "test",
        }
    }
}

/// `k,phase,y1..yg,yhat1..yhatg`.
pub fn format_predictions_csv<T: AsRef<[f64]>, P: AsRef<[f64]>>(
    rows: &[(usize, Phase, T, P)],
) -> String {
    let g = rows.first().map_or(0, |r| r.2.as_ref().len());
    let mut out = String::from("k,phase");
    for d in 1..=g {
        let _ = write!(out, ",y{d}");
    }
    for d in 1..=g {
        let _ = write!(out, ",yhat{d}");
    }
    out.push('\n');
    for (k, phase, y, yhat) in rows {
        let _ = write!(out, "{k},{}", phase.as_str());
        for v in y.as_ref().iter().chain(yhat.as_ref()) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `k,smape,mse`.
pub fn format_curves_csv(smape: &[f64], mse: &[f64]) -> String {
    let mut out = String::from("k,smape,mse\n");
    for (k, (s, m)) in smape.iter().zip(mse).enumerate() {
        let _ = writeln!(out, "{k},{s},{m}");
    }
    out
}

/// `sample_index,new_cascade_count,window_error`.
pub fn format_growth_csv(events: &[crate::cascade::GrowthEvent]) -> String {
    let mut out = String::from("sample_index,new_cascade_count,window_error\n");
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{}",
            e.sample_index, e.new_cascade_count, e.window_error
        );
    }
    out
}
