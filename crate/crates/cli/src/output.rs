//! CSV tables and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bemodel_core::diffusion::SimulationEstimate;
use bemodel_core::verify::ComparisonReport;

/// Column set of comparison reports.
pub const REPORT_COLUMNS: [&str; 5] = ["r", "s_p", "lhs", "rhs", "margin"];
/// Column set of simulation estimates and scans.
pub const SCAN_COLUMNS: [&str; 7] = ["r_start", "n_paths", "events", "censored", "p_hat", "ci_lo", "ci_hi"];

/// An in-memory CSV table, written with a leading `# seed=` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| (*h).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn from_report(name: impl Into<String>, report: &ComparisonReport) -> Self {
        let mut t = Self::new(name, &REPORT_COLUMNS);
        for row in &report.rows {
            t.push([row.r, row.s_p, row.lhs, row.rhs, row.margin].iter().map(|v| num(*v)).collect());
        }
        t
    }

    pub fn from_estimates(name: impl Into<String>, estimates: &[SimulationEstimate]) -> Self {
        let mut t = Self::new(name, &SCAN_COLUMNS);
        for e in estimates {
            t.push(vec![
                num(e.scheme.r_start),
                e.n_paths.to_string(),
                e.events.to_string(),
                e.n_censored.to_string(),
                num(e.p_hat),
                num(e.ci.0),
                num(e.ci.1),
            ]);
        }
        t
    }

    pub fn to_csv(&self, seed: u64) -> Result<Vec<u8>> {
        let mut buf = format!("# seed={seed}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

/// Shortest round-trip formatting, so equal values give equal bytes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_seed_line_and_header() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![num(0.1), num(1.0)]);
        let text = String::from_utf8(t.to_csv(9).unwrap()).unwrap();
        assert_eq!(text, "# seed=9\na,b\n0.1,1.0\n");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "f.csv", b"one").unwrap();
        let p = write_atomic(dir.path(), "f.csv", b"two").unwrap();
        assert_eq!(fs::read(p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
