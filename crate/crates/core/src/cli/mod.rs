//! Command-line driver: config files, scenario presets, studies and artifacts.
//!
//! Exit codes: 0 when every asserted check passes, 1 for configuration
//! errors, 2 for solver errors, 3 when a check fails. `summary.txt` is
//! written in every case.

mod config;
mod io;
mod report;
mod run;
mod scenario;
mod studies;
mod tools;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_config, Config, Forcing, Ic, Route, System};
pub use io::{write_csv, write_summary, FieldDump};
pub use report::{write_error_summary, Report};
pub use run::simulate;
pub use scenario::{
    discrete_neumann_eigenvalue, divergence_lift, divergence_mode, initial_velocity, random_field,
    random_solenoidal, vortex,
};
pub use studies::{compare, convergence, final_velocity, manufactured_error, stability, STABILITY_EPS};
pub use tools::{basis, decompose, heat, load_basis, save_basis};

use crate::error::{Error, Result};

/// Environment variable capping the rayon pool.
pub const THREADS_ENV: &str = "ENSLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "enslab", version, about = "Extended Navier-Stokes laboratory on a MAC grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for randomized presets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only report failures.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Integrate one system along one route.
    Run,
    /// Manufactured-solution spatial convergence.
    Convergence,
    /// Route A against route B under dt refinement.
    Compare,
    /// Linear response to solenoidal perturbations.
    Stability,
    /// Build and cache the Galerkin eigenbasis.
    Basis,
    /// Divergence heat oracle alone.
    Heat,
    /// One-shot `u = v + z` decomposition.
    Decompose,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Convergence => "convergence",
            Command::Compare => "compare",
            Command::Stability => "stability",
            Command::Basis => "basis",
            Command::Heat => "heat",
            Command::Decompose => "decompose",
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // A pool already built by an earlier call in this process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(cli: &Cli) -> Result<Config> {
    configure_threads()?;
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("missing --config <path>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn dispatch(cmd: Command, cfg: &Config, out: &Path) -> Result<Report> {
    match cmd {
        Command::Run => simulate(cfg),
        Command::Convergence => convergence(cfg),
        Command::Compare => compare(cfg),
        Command::Stability => stability(cfg),
        Command::Basis => basis(cfg, out),
        Command::Heat => heat(cfg),
        Command::Decompose => decompose(cfg),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    let cfg = load(&cli);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().ok().and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    let result = cfg.and_then(|cfg| dispatch(cli.command, &cfg, &out));
    match result {
        Err(e) => {
            eprintln!("enslab {name}: error: {e}");
            if let Err(w) = write_error_summary(&out, name, &e) {
                eprintln!("enslab {name}: cannot write summary to {}: {w}", out.display());
            }
            e.exit_code()
        }
        Ok(report) => {
            let ok = match report.write(&out) {
                Ok(ok) => ok,
                Err(e) => {
                    eprintln!("enslab {name}: cannot write artifacts to {}: {e}", out.display());
                    return e.exit_code();
                }
            };
            for line in report.verdict_lines() {
                if !cli.quiet || line.starts_with("FAIL") {
                    println!("{line}");
                }
            }
            if !cli.quiet {
                println!("summary: {}", out.join("summary.txt").display());
            }
            if ok {
                0
            } else {
                3
            }
        }
    }
}

pub fn main() -> i32 {
    run_cli(std::env::args_os())
}
