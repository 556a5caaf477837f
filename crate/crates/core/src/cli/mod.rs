//! Command-line driver: one subcommand per computation, `key = value`
//! configs, JSON reports and plot-ready artifacts.
//!
//! Exit status is 0 when every check passes, 2 when a check fails and 1 on
//! any operational error (bad config, solver failure, I/O).

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use commands::{equilibrium_json, figure_csv, run, Check, Outcome};
pub use config::{parse_pairs, schema, KeySpec, RunConfig, COMMANDS};

use crate::error::{Error, Result};
use crate::report::{envelope, to_pretty, write_atomic};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SPIKEFORGE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "spikeforge", version, about = "Ground states, spike chains and sweeps for -Δu = f(u)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial ground state by shooting, with the tail amplitude.
    Groundstate(RunArgs),
    /// Spectrum of the linearization about the ground state.
    Spectrum(RunArgs),
    /// The constants D (two routes) and E.
    Constants(RunArgs),
    /// Periodic solutions: residue law and instability eigenvalue.
    Delaunay(RunArgs),
    /// Dirichlet projection of a ground state over a sweep of heights.
    Projection(RunArgs),
    /// Eigenvalue perturbation bounds for random bump potentials.
    Eigen(RunArgs),
    /// Principal eigenvalue of a potential supported on shrinking slabs.
    ThinSet(RunArgs),
    /// Force balance of a spike chain, or a nonexistence certificate.
    Balance(RunArgs),
    /// Balance over a list of cone apertures, with a CSV table.
    ApertureScan(RunArgs),
    /// Parabolic sweeps to the stable steady state.
    Sweep(RunArgs),
    /// Principal eigenvalue of a steady state or of a polished spike ansatz.
    Stability(RunArgs),
    /// CSV of an equilibrium's centres and force arrows.
    FigEquilibrium(RunArgs),
    /// List the keys a subcommand accepts, with defaults.
    Keys {
        /// Subcommand name.
        name: String,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key (repeatable); wins over the config file.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (same as `out_dir = ...`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the randomized checks (same as `seed = ...`).
    #[arg(long)]
    seed: Option<u64>,
    /// Validate the config, print the resolved keys and stop.
    #[arg(long)]
    dry_run: bool,
    /// Also write the equilibrium figure CSV (balance).
    #[arg(long)]
    fig: bool,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

/// One resolved invocation of a subcommand.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub command: String,
    pub config: Option<PathBuf>,
    /// `key = value` overrides applied after the config file.
    pub overrides: Vec<(String, String)>,
    pub dry_run: bool,
    pub fig: bool,
    pub timestamp: bool,
}

/// What a run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub config: RunConfig,
    /// `None` for dry runs.
    pub report_path: Option<PathBuf>,
    pub report: Value,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }
}

fn split_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::config(s, "expected KEY=VALUE")),
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(THREADS_ENV, format!("expected a positive integer, found `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

pub(crate) fn pretty_bytes(v: &Value) -> Vec<u8> {
    to_pretty(v).into_bytes()
}

/// Resolves the config of `inv` without running anything.
pub fn resolve(inv: &Invocation) -> Result<RunConfig> {
    let file = match &inv.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    RunConfig::resolve(&inv.command, &file, &inv.overrides)
}

/// Resolves, runs and writes the report and artifacts of one invocation.
pub fn execute(inv: &Invocation) -> Result<RunSummary> {
    let cfg = resolve(inv)?;
    if inv.dry_run {
        return Ok(RunSummary {
            report: cfg.parameters(),
            config: cfg,
            report_path: None,
            checks: Vec::new(),
        });
    }
    let outcome = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(THREADS_ENV, e.to_string()))?
            .install(|| run(&cfg, inv.fig))?,
        None => run(&cfg, inv.fig)?,
    };
    let mut names = Vec::new();
    for (name, bytes) in &outcome.artifacts {
        write_atomic(&cfg.out_dir.join(name), bytes)?;
        names.push(name.clone());
    }
    let passed = outcome.checks.iter().all(|c| c.passed);
    let results = json!({
        "values": outcome.results,
        "checks": outcome.checks,
        "passed": passed,
        "artifacts": names,
    });
    let report = envelope(
        &cfg.command,
        cfg.seed,
        cfg.parameters(),
        results,
        inv.timestamp.then(timestamp),
    );
    let path = cfg.out_dir.join(format!("{}.json", cfg.command));
    write_atomic(&path, to_pretty(&report).as_bytes())?;
    Ok(RunSummary {
        config: cfg,
        report_path: Some(path),
        report,
        checks: outcome.checks,
    })
}

fn invocation(name: &str, a: RunArgs) -> Result<Invocation> {
    let mut overrides = a.set.iter().map(|s| split_override(s)).collect::<Result<Vec<_>>>()?;
    if let Some(seed) = a.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(out) = a.out {
        overrides.push(("out_dir".into(), out.to_string_lossy().into_owned()));
    }
    Ok(Invocation {
        command: name.to_string(),
        config: a.config,
        overrides,
        dry_run: a.dry_run,
        fig: a.fig,
        timestamp: !a.no_timestamp,
    })
}

fn print_keys(name: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    for k in schema(name)? {
        let default = k.default.map_or("(required)".to_string(), |d| format!("= {d}"));
        let _ = writeln!(out, "{:<32} {:<28} {}", k.name, default, k.help);
    }
    Ok(())
}

/// Parses `args` (program name first), runs, prints the checks and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = match cli.command {
        Command::Keys { name } => {
            return match print_keys(&name) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Command::Groundstate(a) => ("groundstate", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Constants(a) => ("constants", a),
        Command::Delaunay(a) => ("delaunay", a),
        Command::Projection(a) => ("projection", a),
        Command::Eigen(a) => ("eigen", a),
        Command::ThinSet(a) => ("thin-set", a),
        Command::Balance(a) => ("balance", a),
        Command::ApertureScan(a) => ("aperture-scan", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Stability(a) => ("stability", a),
        Command::FigEquilibrium(a) => ("fig-equilibrium", a),
    };
    let result = invocation(name, args).and_then(|inv| {
        let s = execute(&inv)?;
        Ok((inv.dry_run, s))
    });
    match result {
        Ok((true, s)) => {
            let _ = write!(std::io::stdout().lock(), "{}", s.config.render());
            0
        }
        Ok((false, s)) => {
            let mut out = std::io::stdout().lock();
            for c in &s.checks {
                let _ = writeln!(out, "{}", c.line());
            }
            if let Some(p) = &s.report_path {
                let _ = writeln!(out, "report: {}", p.display());
            }
            s.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_need_an_equals_sign() {
        assert!(split_override("d=2").is_ok());
        let err = split_override("d2").unwrap_err().to_string();
        assert!(err.contains("d2"), "{err}");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["spikeforge", "no-such-command"]), 1);
        assert_eq!(main_with_args(["spikeforge", "groundstate", "--dry-run"]), 1);
    }

    #[test]
    fn dry_run_resolves_without_output() {
        let inv = Invocation {
            command: "thin-set".into(),
            overrides: vec![("nonlin.kind".into(), "bistable".into())],
            dry_run: true,
            ..Invocation::default()
        };
        let s = execute(&inv).unwrap();
        assert!(s.report_path.is_none());
        assert_eq!(s.config.str("thin.steps").unwrap(), "4");
    }
}
