//! Human-readable summaries of finished runs. Read-only.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::output::Manifest;

fn manifest_path(path: &Path) -> anyhow::Result<PathBuf> {
    if path.is_dir() {
        let p = path.join("manifest.json");
        if !p.is_file() {
            bail!("no manifest.json in {}", path.display());
        }
        Ok(p)
    } else if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        bail!("{} does not exist", path.display());
    }
}

fn read_csv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> anyhow::Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column {name}"))
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let s: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        println!("  {}", s.join("  ").trim_end());
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
}

/// Renders the manifest at `path` (or `path/manifest.json`) and its summary.
pub fn report(path: &Path) -> anyhow::Result<()> {
    let mpath = manifest_path(path)?;
    let dir = mpath.parent().unwrap_or(Path::new("."));
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(&mpath)?)
        .with_context(|| format!("parsing {}", mpath.display()))?;
    println!(
        "{} run, seed {}, status {} (exit {})",
        m.kind, m.seed, m.status, m.exit_code
    );
    println!(
        "scv-runner {}, scv-core {}, {} jobs, {:.3} s",
        m.versions.scv_runner, m.versions.scv_core, m.jobs, m.wall_time_s
    );
    if let Some(e) = &m.error {
        println!("error: {e}");
    }
    let spath = dir.join("summary.csv");
    if !spath.is_file() {
        bail!("{} is missing", spath.display());
    }
    let (h, rows) = read_csv(&spath)?;
    let (im, iv, it) = (
        column(&h, "metric")?,
        column(&h, "value")?,
        column(&h, "tolerance")?,
    );
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r[im].clone(), r[iv].clone(), r[it].clone()])
        .collect();
    println!();
    print_table(&["metric", "value", "tolerance"], &summary);

    match m.kind.as_str() {
        "regularity" => {
            let (h, rows) = read_csv(&dir.join("regularity.csv"))?;
            let cols = [
                column(&h, "theta")?,
                column(&h, "alpha")?,
                column(&h, "fitted_alpha")?,
            ];
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            println!();
            print_table(&["theta", "alpha(theta)", "fitted alpha"], &table);
        }
        "kobayashi" => {
            let total: u64 = summary
                .iter()
                .filter(|r| r[0].contains("violations"))
                .map(|r| r[1].parse::<u64>().unwrap_or(0))
                .sum();
            println!();
            println!("sandwich and decreasing violations: {total} (expected 0)");
        }
        _ => {}
    }
    Ok(())
}
