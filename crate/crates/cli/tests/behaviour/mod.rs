//! End-to-end behaviour of the `scv` binary: exit codes, artifacts, report.
//! Not acceptance criteria; they share the binary so a failing criterion does
//! not keep them from running.

use std::path::Path;
use std::process::{Command, Output};

fn scv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scv"))
        .args(args)
        .output()
        .expect("scv runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (h, rows)
}

#[test]
fn selftest_subcommand_succeeds() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    let o = scv(&["selftest", "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["kind"], "selftest");
    assert_eq!(m["status"], "ok");
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["versions"]["scv_core"].is_string());
    assert!(!out.join("witnesses.json").exists());
}

#[test]
fn usage_errors_exit_1_without_artifacts() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("malformed.json", r#"{"kind": "discs", "seed": "#),
        ("unknown.json", r#"{"kind": "selftest", "sede": 3}"#),
        ("noseed.json", r#"{"kind": "kobayashi"}"#),
        (
            "foreign.json",
            r#"{"kind": "regularity", "seed": 1, "kobayashi": {}}"#,
        ),
        (
            "badedge.json",
            r#"{"kind": "discs", "seed": 1, "discs": {"edge": {"kind": "polynomial", "phi": []}}}"#,
        ),
    ];
    for (name, text) in cases {
        let cfg = write(tmp.path(), name, text);
        let out = tmp.path().join(format!("out-{name}"));
        let o = scv(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!out.exists(), "{name} left artifacts");
    }
    assert_eq!(scv(&["run"]).status.code(), Some(1));
    assert_eq!(scv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        scv(&[
            "selftest",
            "--jobs",
            "0",
            "--out",
            tmp.path().join("j0").to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn certificate_failure_exits_2_with_witnesses() {
    let _g = crate::serial();
    // below θ = 1/2 the power of ‖x‖² stops being plurisubharmonic
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "reg.json",
        r#"{"kind": "regularity", "seed": 2, "regularity": {"thetas": [0.4], "extended": true, "rays": 4}}"#,
    );
    let out = tmp.path().join("out");
    let o = scv(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let w: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("witnesses.json")).unwrap()).unwrap();
    assert!(!w[0]["points"][0].as_array().unwrap().is_empty());
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["exit_code"], 2);
}

#[test]
fn strict_promotes_warnings() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "kob.json",
        r#"{"kind": "kobayashi", "seed": 3, "kobayashi": {"dims": [1], "samples": 10, "decreasing_samples": 5,
            "extremal": [{"z": [[0.5, 0.0]], "v": [[1.0, 0.0]], "degree": 1, "restarts": 1}]}}"#,
    );
    let lax = tmp.path().join("lax");
    let strict = tmp.path().join("strict");
    assert_eq!(
        scv(&["run", &cfg, "--out", lax.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        scv(&["run", &cfg, "--out", strict.to_str().unwrap(), "--strict"])
            .status
            .code(),
        Some(2)
    );
    assert!(strict.join("witnesses.json").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "a.json",
        r#"{"kind": "domains-audit", "seed": 1, "domains-audit": {"domains": [{"kind": "ellipsoid", "a": [1.0, 2.0]}], "samples": 8}}"#,
    );
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    scv(&["run", &cfg, "--out", a.to_str().unwrap()]);
    scv(&["run", &cfg, "--out", b.to_str().unwrap(), "--seed", "1"]);
    scv(&["run", &cfg, "--out", c.to_str().unwrap(), "--seed", "2"]);
    let f = |d: &Path| std::fs::read(d.join("audit_0.csv")).unwrap();
    assert_eq!(f(&a), f(&b));
    assert_ne!(f(&a), f(&c));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 2);
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.json",
        r#"{"kind": "discs", "seed": 4, "discs": {"edge": {"kind": "flat", "n": 2}, "grid": {"points": 3},
            "circle_samples": 64, "fill_samples": 30, "foliation_samples": 10, "min_coverage": 0.5}}"#,
    );
    let (a, b) = (tmp.path().join("seq"), tmp.path().join("par"));
    scv(&["run", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]);
    scv(&["run", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"]);
    for f in ["members.csv", "fill.csv", "foliation.csv", "summary.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

/// Recomputes each `min`/`max`/`mean`/`count(rows)` summary entry from the
/// CSV column it names.
#[test]
fn summary_values_trace_to_csv_rows() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.json",
        r#"{"kind": "discs", "seed": 9, "discs": {"edge": {"kind": "perturbed-flat", "n": 2, "epsilon": 0.05},
            "grid": {"points": 3}, "circle_samples": 64, "fill_samples": 40, "foliation_samples": 10, "min_coverage": 0.5}}"#,
    );
    let out = tmp.path().join("out");
    scv(&["run", &cfg, "--out", out.to_str().unwrap()]);
    let (h, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(h, ["metric", "value", "tolerance", "source"]);
    let mut checked = 0;
    for r in rows {
        let (file, expr) = r[3].split_once(": ").unwrap();
        let (ch, crows) = read_csv(&out.join(file));
        let (op, arg) = expr.trim_end_matches(')').split_once('(').unwrap();
        let col = |name: &str| -> Vec<f64> {
            let k = ch
                .iter()
                .position(|c| c == name)
                .unwrap_or_else(|| panic!("{name} in {file}"));
            crows
                .iter()
                .filter(|r| !r[k].is_empty())
                .map(|r| r[k].parse().unwrap())
                .collect()
        };
        let value: f64 = r[1].parse().unwrap();
        let expect = match (op, arg) {
            ("count", "rows") => crows.len() as f64,
            ("max", c) => col(c).into_iter().fold(f64::NEG_INFINITY, f64::max),
            ("min", c) => col(c).into_iter().fold(f64::INFINITY, f64::min),
            ("mean", "covered") => col("covered").iter().sum::<f64>() / crows.len() as f64,
            ("mean", "multiplicity = 1") => {
                col("multiplicity").iter().filter(|m| **m == 1.0).count() as f64
                    / crows.len() as f64
            }
            ("count", "status = solved") => {
                let k = ch.iter().position(|c| c == "status").unwrap();
                crows.iter().filter(|r| r[k] == "solved").count() as f64
            }
            _ => panic!("untraced summary entry {r:?}"),
        };
        assert_eq!(value, expect, "{}", r[0]);
        checked += 1;
    }
    assert_eq!(checked, 8);
}

#[test]
fn report_prints_tables_and_rejects_empty_dirs() {
    let _g = crate::serial();
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = scv(&["report", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no manifest.json"));

    let cfg = write(
        tmp.path(),
        "r.json",
        r#"{"kind": "regularity", "seed": 1, "regularity": {"thetas": [0.6, 0.8], "rays": 4}}"#,
    );
    let out = tmp.path().join("reg");
    assert_eq!(
        scv(&["run", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let before = std::fs::read(out.join("regularity.csv")).unwrap();
    let o = scv(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("alpha(theta)") && text.contains("0.8333333333333334"),
        "{text}"
    );
    assert_eq!(std::fs::read(out.join("regularity.csv")).unwrap(), before);

    let cfg = write(
        tmp.path(),
        "k.json",
        r#"{"kind": "kobayashi", "seed": 1, "kobayashi": {"dims": [1], "samples": 10, "decreasing_samples": 5, "extremal": []}}"#,
    );
    let out = tmp.path().join("kob");
    assert_eq!(
        scv(&["run", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let o = scv(&["report", out.join("manifest.json").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations: 0 (expected 0)"));
}
