//! Tables, summaries and the run manifest.

use std::path::{Path, PathBuf};

use anyhow::Context;
use num_complex::Complex64;
use serde::Serialize;

/// Shortest round-trip formatting, so identical values give identical bytes.
/// Very small and very large magnitudes switch to exponent notation.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV table held in memory until the run finishes.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Header with `prefix_re_k, prefix_im_k` columns appended for `n` coordinates.
    pub fn complex_columns(mut self, prefix: &str, n: usize) -> Self {
        for k in 0..n {
            self.header.push(format!("{prefix}{k}_re"));
            self.header.push(format!("{prefix}{k}_im"));
        }
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join(self.file_name());
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

pub fn complex_cells(z: &[Complex64]) -> Vec<String> {
    z.iter().flat_map(|c| [num(c.re), num(c.im)]).collect()
}

/// One `summary.csv` row. `source` names the CSV file and the reduction that
/// produces `value` from it.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub metric: String,
    pub value: String,
    pub tolerance: String,
    pub source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub what: String,
    pub points: Vec<Vec<f64>>,
}

/// Everything an experiment produces.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub summary: Vec<SummaryRow>,
    /// Certificate failures; any entry makes the run exit with status 2.
    pub failures: Vec<Witness>,
    /// Soft failures, promoted to failures under `--strict`.
    pub warnings: Vec<Witness>,
}

impl Artifacts {
    pub fn metric(&mut self, metric: &str, value: f64, tolerance: &str, source: &str) {
        self.summary.push(SummaryRow {
            metric: metric.into(),
            value: num(value),
            tolerance: tolerance.into(),
            source: source.into(),
        });
    }

    pub fn count(&mut self, metric: &str, value: usize, tolerance: &str, source: &str) {
        self.summary.push(SummaryRow {
            metric: metric.into(),
            value: value.to_string(),
            tolerance: tolerance.into(),
            source: source.into(),
        });
    }

    pub fn fail(&mut self, what: impl Into<String>, points: Vec<Vec<f64>>) {
        self.failures.push(Witness {
            what: what.into(),
            points,
        });
    }

    pub fn warn(&mut self, what: impl Into<String>, points: Vec<Vec<f64>>) {
        self.warnings.push(Witness {
            what: what.into(),
            points,
        });
    }

    fn summary_table(&self) -> Table {
        let mut t = Table::new("summary", &["metric", "value", "tolerance", "source"]);
        for r in &self.summary {
            t.push(vec![
                r.metric.clone(),
                r.value.clone(),
                r.tolerance.clone(),
                r.source.clone(),
            ]);
        }
        t
    }

    /// Writes every table plus `summary.csv`, and `witnesses.json` when there
    /// is anything to dump. Returns the file names written.
    pub fn write(&self, dir: &Path, include_warnings: bool) -> anyhow::Result<Vec<String>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut names = Vec::new();
        for t in self
            .tables
            .iter()
            .chain(std::iter::once(&self.summary_table()))
        {
            t.write(dir)?;
            names.push(t.file_name());
        }
        let mut dump: Vec<&Witness> = self.failures.iter().collect();
        if include_warnings {
            dump.extend(self.warnings.iter());
        }
        if !dump.is_empty() {
            let path = dir.join("witnesses.json");
            std::fs::write(&path, serde_json::to_string_pretty(&dump)?)?;
            names.push("witnesses.json".into());
        }
        Ok(names)
    }
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config: serde_json::Value,
    pub config_path: String,
    pub seed: u64,
    pub jobs: usize,
    pub strict: bool,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub status: String,
    pub exit_code: i32,
    pub artifacts: Vec<String>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Versions {
    pub scv_runner: String,
    pub scv_core: String,
    pub rustc_target: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            scv_runner: env!("CARGO_PKG_VERSION").into(),
            scv_core: scv_core::VERSION.into(),
            rustc_target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        }
    }
}
