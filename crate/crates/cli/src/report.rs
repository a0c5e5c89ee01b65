use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::failure::Outcome;

pub const VERSION: &str = env!("MEMOLAB_VERSION");
pub const RESULTS_HEADER: &str = "version,seed,scenario,key,value";

/// Collects `results.csv` rows and side files for one scenario run.
pub struct Report {
    pub out_dir: PathBuf,
    pub scenario: &'static str,
    pub seed: u64,
    rows: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn new(out_dir: PathBuf, scenario: &'static str, seed: u64) -> Outcome<Self> {
        fs::create_dir_all(&out_dir)?;
        Ok(Self { out_dir, scenario, seed, rows: Vec::new(), files: Vec::new() })
    }

    pub fn record(&mut self, key: impl Into<String>, value: impl Display) {
        self.rows.push((key.into(), value.to_string()));
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn write_file(&mut self, name: &str, contents: &str) -> Outcome<PathBuf> {
        let p = self.path(name);
        fs::write(&p, contents)?;
        self.files.push(p.clone());
        Ok(p)
    }

    /// Writes a CSV from a header and rows of already-formatted cells.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Outcome<PathBuf> {
        let mut s = format!("{header}\n");
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write_file(name, &s)
    }

    pub fn results_csv(&self) -> String {
        let mut s = format!("{RESULTS_HEADER}\n");
        for (k, v) in &self.rows {
            s.push_str(&format!("{VERSION},{},{},{},{}\n", self.seed, self.scenario, csv_cell(k), csv_cell(v)));
        }
        s
    }

    pub fn finish(mut self) -> Outcome<Vec<PathBuf>> {
        let body = self.results_csv();
        self.write_file("results.csv", &body)?;
        Ok(self.files)
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest round-trip float text, for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
