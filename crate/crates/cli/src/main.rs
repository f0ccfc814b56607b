//! `scv`: seeded experiment runner for the several-complex-variables toolkit.

mod config;
mod experiments;
mod output;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use scv_core::{Error, Exec};

use crate::config::{ExperimentConfig, Kind};
use crate::output::{Artifacts, Manifest, Versions, Witness};

#[derive(Parser)]
#[command(
    name = "scv",
    version,
    about = "Seeded numerical experiments on discs, wedges and invariant metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Treat certificate warnings as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Summarise a finished run from its manifest or output directory.
    Report { manifest: PathBuf },
    /// Run the circle-calculus trig-polynomial suite.
    Selftest {
        #[command(flatten)]
        flags: RunFlags,
    },
}

const USAGE: u8 = 1;
const CERTIFICATE: u8 = 2;

/// Numerical failures of a hypothesis or certificate, as opposed to bad input.
fn is_certificate_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Hypothesis { .. }
            | Error::Properness(_)
            | Error::Divergence { .. }
            | Error::DomainEscape { .. }
            | Error::NoConvergence
            | Error::Singular(_)
            | Error::DegenerateBoundary(_)
            | Error::DegenerateDifferential(_)
    )
}

fn error_witness(e: &Error) -> Witness {
    let points = match e {
        Error::Hypothesis { witnesses, .. } => witnesses.clone(),
        Error::Divergence { history, .. } => vec![history.clone()],
        _ => vec![],
    };
    Witness {
        what: e.to_string(),
        points,
    }
}

fn executor(jobs: Option<usize>) -> anyhow::Result<(Exec, usize)> {
    match jobs {
        Some(0) => anyhow::bail!("--jobs must be at least 1"),
        Some(1) => Ok((Exec::Sequential, 1)),
        Some(k) => {
            // the global pool can only be configured once per process
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global();
            Ok((Exec::Parallel, rayon::current_num_threads()))
        }
        None => Ok((Exec::Parallel, rayon::current_num_threads())),
    }
}

fn execute(cfg: &ExperimentConfig, seed: u64, exec: Exec) -> scv_core::Result<Artifacts> {
    let mut a = Artifacts::default();
    match cfg.kind {
        Kind::Discs => {
            experiments::discs(&cfg.discs.clone().unwrap_or_default(), seed, exec, &mut a)?
        }
        Kind::Kobayashi => experiments::kobayashi(
            &cfg.kobayashi.clone().unwrap_or_default(),
            seed,
            exec,
            &mut a,
        )?,
        Kind::Regularity => experiments::regularity(
            &cfg.regularity.clone().unwrap_or_default(),
            seed,
            exec,
            &mut a,
        )?,
        Kind::DomainsAudit => experiments::domains_audit(
            cfg.domains_audit.as_ref().expect("checked at load"),
            seed,
            exec,
            &mut a,
        )?,
        Kind::Selftest => experiments::selftest(exec, &mut a)?,
    }
    Ok(a)
}

fn run(
    cfg: ExperimentConfig,
    config_path: &str,
    seed: Option<u64>,
    flags: &RunFlags,
) -> anyhow::Result<u8> {
    let seed = cfg.resolve_seed(seed)?;
    let (exec, jobs) = executor(flags.jobs)?;
    let out = flags
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("scv-out"));
    let start = Instant::now();
    let result = execute(&cfg, seed, exec);
    let (artifacts, error) = match result {
        Ok(a) => (a, None),
        Err(e) if is_certificate_error(&e) => {
            let mut a = Artifacts::default();
            a.failures.push(error_witness(&e));
            (a, Some(e.to_string()))
        }
        Err(e) => return Err(anyhow::Error::new(e).context("invalid experiment")),
    };
    let failed = !artifacts.failures.is_empty() || (flags.strict && !artifacts.warnings.is_empty());
    let mut names = artifacts.write(&out, flags.strict)?;
    let code = if failed { CERTIFICATE } else { 0 };
    names.push("manifest.json".into());
    let manifest = Manifest {
        kind: cfg.kind.name().into(),
        config: serde_json::to_value(&cfg)?,
        config_path: config_path.into(),
        seed,
        jobs,
        strict: flags.strict,
        versions: Versions::current(),
        wall_time_s: start.elapsed().as_secs_f64(),
        status: if failed { "certificate-failure" } else { "ok" }.into(),
        exit_code: code as i32,
        artifacts: names,
        error,
    };
    std::fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    for r in &artifacts.summary {
        println!("{:<40} {:<24} {}", r.metric, r.value, r.tolerance);
    }
    for w in &artifacts.warnings {
        eprintln!("warning: {}", w.what);
    }
    for w in &artifacts.failures {
        eprintln!("failure: {}", w.what);
    }
    if failed {
        eprintln!(
            "witnesses written to {}",
            out.join("witnesses.json").display()
        );
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run {
            config,
            seed,
            flags,
        } => ExperimentConfig::load(config)
            .and_then(|cfg| run(cfg, &config.display().to_string(), *seed, flags)),
        Command::Selftest { flags } => {
            let cfg = ExperimentConfig::parse(r#"{"kind": "selftest"}"#).expect("builtin config");
            run(cfg, "<builtin selftest>", None, flags)
        }
        Command::Report { manifest } => report::report(Path::new(manifest)).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        assert!(is_certificate_error(&Error::NoConvergence));
        assert!(is_certificate_error(&Error::Properness(3)));
        assert!(!is_certificate_error(&Error::InvalidSpec("x".into())));
        assert!(!is_certificate_error(&Error::DimensionMismatch {
            expected: 1,
            actual: 2
        }));
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from([
            "scv", "run", "x.json", "--seed", "7", "--jobs", "1", "--strict",
        ])
        .unwrap();
        assert!(matches!(c.command, Command::Run { seed: Some(7), .. }));
    }

    #[test]
    fn defaults_are_constructible() {
        use crate::config::{DiscsParams, KobayashiParams, RegularityParams};
        let _ = DiscsParams::default();
        let _ = KobayashiParams::default();
        let _ = RegularityParams::default();
    }
}
