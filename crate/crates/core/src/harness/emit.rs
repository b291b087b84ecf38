use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::transfer::cache::write_subspace;

use super::sweep::SweepRecord;

/// CSV header for records with `n_gamma` exponent and `n_proj` projection columns.
pub fn csv_header(n_gamma: usize, n_proj: usize) -> Vec<String> {
    let mut h = vec!["axis".to_string()];
    h.extend((1..=n_gamma).map(|i| format!("gamma_diff_{i}")));
    h.extend((1..=n_proj).map(|i| format!("proj_tnorm_diff_{i}")));
    h.extend(["slow_gap", "theta", "eta", "pass", "wall_ms"].map(String::from));
    h
}

/// Write records as CSV; an empty record list gives the header alone.
pub fn write_csv<W: Write>(w: W, records: &[SweepRecord], n_gamma: usize, n_proj: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header = csv_header(n_gamma, n_proj);
    out.write_record(&header).map_err(csv_error)?;
    for r in records {
        if r.gamma_diff.len() != n_gamma || r.proj_tnorm_diff.len() != n_proj {
            return Err(Error::DimensionMismatch { expected: n_gamma + n_proj, found: r.gamma_diff.len() + r.proj_tnorm_diff.len() });
        }
        let mut row = vec![r.axis.to_string()];
        row.extend(r.gamma_diff.iter().map(f64::to_string));
        row.extend(r.proj_tnorm_diff.iter().map(f64::to_string));
        row.extend([r.slow_gap.to_string(), r.theta.to_string(), r.eta.to_string(), r.pass.to_string(), r.wall_ms.to_string()]);
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Container(format!("{other:?}")),
    }
}

/// Pretty JSON with a trailing newline. Field order follows the type
/// definitions, so identical inputs give identical bytes.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Wall-clock times, kept out of the main JSON so it stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub verb: String,
    pub total_ms: f64,
    /// `(axis, wall_ms)` per record.
    pub records: Vec<(f64, f64)>,
}

impl Timing {
    pub fn new(verb: &str, total_ms: f64, records: &[SweepRecord]) -> Self {
        Timing { verb: verb.into(), total_ms, records: records.iter().map(|r| (r.axis, r.wall_ms)).collect() }
    }
}

/// Output directory of one verb: `<dir>/<verb>.json`, `<verb>.csv`,
/// `<verb>.timing.json` and basis files.
#[derive(Debug, Clone)]
pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&self, verb: &str, value: &T) -> Result<PathBuf> {
        let p = self.path(&format!("{verb}.json"));
        fs::write(&p, to_json(value)?)?;
        Ok(p)
    }

    pub fn csv(&self, verb: &str, records: &[SweepRecord], n_gamma: usize, n_proj: usize) -> Result<PathBuf> {
        let p = self.path(&format!("{verb}.csv"));
        write_csv(fs::File::create(&p)?, records, n_gamma, n_proj)?;
        Ok(p)
    }

    pub fn timing(&self, timing: &Timing) -> Result<PathBuf> {
        let p = self.path(&format!("{}.timing.json", timing.verb));
        fs::write(&p, to_json(timing)?)?;
        Ok(p)
    }

    /// Store a basis in the SUB1 container; returns the file name.
    pub fn subspace(&self, name: &str, s: &Subspace) -> Result<String> {
        let mut f = std::io::BufWriter::new(fs::File::create(self.path(name))?);
        write_subspace(&mut f, s)?;
        f.flush()?;
        Ok(name.to_string())
    }
}
