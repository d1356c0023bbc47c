//! Command-line front end: `solve`, `classify`, `sweep`, `verify` and
//! `transform`.
//!
//! Settings come from built-in defaults, then an optional `key = value`
//! config file, then flags. Every artifact records the tool version and the
//! fully resolved settings, and identical settings give byte-identical
//! output.

mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::analyze::{run_suite, to_physical, SuiteOptions};
use crate::classify::{classify, Verdict};
use crate::error::Error;
use crate::shoot::{bisect_with, find_bracket_with, sweep_with, BisectOptions, BracketSearch};

pub use config::{load_config, parse_config, resolve, ConfigError, Format, Overrides, RunConfig};
use output::Artifact;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_UNDETERMINED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "choquard", version, about = "Shooting solver for the radial Choquard ground state")]
pub struct Cli {
    /// Config file with `key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracket and bisect the ground-state height, then write the summary
    /// and the trajectory
    Solve,
    /// Classify one initial height
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        u0: f64,
    },
    /// Classify a grid of initial heights
    Sweep {
        #[arg(long, default_value_t = 0.05)]
        from: f64,
        #[arg(long, default_value_t = 0.24)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Geometric instead of arithmetic spacing
        #[arg(long)]
        log: bool,
        /// Explicit comma-separated heights; replaces the grid
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Run every structural check for the configured (N, p)
    Verify,
    /// Map the ground state to physical variables for given λ and γ
    Transform {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        gamma: f64,
    },
}

/// Exit code for a library error: bad input is a usage error, everything
/// else is a solver failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_) | Error::Domain(_) | Error::Unsupported(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

fn fail(stage: &str, e: &Error) -> i32 {
    eprintln!("error: {stage}: {e}");
    exit_code(e)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let cfg = match resolve(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: usage: {e}");
        return EXIT_USAGE;
    }
    match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Classify { u0 } => cmd_classify(&cfg, u0),
        Command::Sweep { from, to, count, log, values } => {
            let grid = match values {
                Some(v) => v,
                None => match grid(from, to, count, log) {
                    Ok(g) => g,
                    Err(e) => return fail("usage", &e),
                },
            };
            cmd_sweep(&cfg, &grid)
        }
        Command::Verify => cmd_verify(&cfg),
        Command::Transform { lambda, gamma } => cmd_transform(&cfg, lambda, gamma),
    }
}

/// `count` heights from `from` to `to`, evenly or geometrically spaced.
pub fn grid(from: f64, to: f64, count: usize, log: bool) -> crate::Result<Vec<f64>> {
    if !(from > 0.0 && to >= from && to.is_finite()) {
        return Err(Error::InvalidParams(format!("grid needs 0 < from <= to, got {from}..{to}")));
    }
    Ok(match count {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                if i == count - 1 {
                    to
                } else if log {
                    from * (to / from).powf(t)
                } else {
                    from + (to - from) * t
                }
            })
            .collect(),
    })
}

fn emit(cfg: &RunConfig, artifact: &Artifact) -> i32 {
    match output::write(cfg, artifact) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: output: {e}");
            EXIT_SOLVER
        }
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> i32 {
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e),
    };
    let bracket = match find_bracket_with(params, cfg.controls(), cfg.policy(), BracketSearch::default()) {
        Ok(b) => b,
        Err(e) => return fail("bracket", &e),
    };
    let opts = BisectOptions { tol: cfg.tol, policy: cfg.policy(), ..Default::default() };
    let gs = match bisect_with(bracket, params, cfg.controls(), opts) {
        Ok(g) => g,
        Err(e) => return fail("bisection", &e),
    };
    let samples = match gs.trajectory.sample(0.0, gs.trajectory.r_end(), cfg.samples) {
        Ok(s) => s,
        Err(e) => return fail("sampling", &e),
    };
    emit(cfg, &Artifact::Solve { summary: gs.summary(), trajectory: samples })
}

pub fn cmd_classify(cfg: &RunConfig, u0: f64) -> i32 {
    if !(u0 > 0.0 && u0.is_finite()) {
        eprintln!("error: usage: u0 must be positive and finite, got {u0}");
        return EXIT_USAGE;
    }
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e),
    };
    let c = match classify(u0, params, cfg.controls(), cfg.policy()) {
        Ok(c) => c,
        Err(e) => return fail("classify", &e),
    };
    let code = emit(cfg, &Artifact::Classify { record: c.record() });
    if code == EXIT_OK && c.tag == Verdict::Undetermined {
        EXIT_UNDETERMINED
    } else {
        code
    }
}

pub fn cmd_sweep(cfg: &RunConfig, u0s: &[f64]) -> i32 {
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e),
    };
    let results = sweep_with(u0s, params, cfg.controls(), cfg.policy());
    let failed = results.iter().any(|r| r.is_err());
    let undetermined = results.iter().any(|r| matches!(r, Ok(c) if c.tag == Verdict::Undetermined));
    let records =
        results.into_iter().zip(u0s).map(|(r, &u0)| r.map(|c| c.record()).map_err(|e| (u0, e.to_string()))).collect();
    let code = emit(cfg, &Artifact::Sweep { records });
    match () {
        _ if code != EXIT_OK => code,
        _ if failed => EXIT_SOLVER,
        _ if undetermined => EXIT_UNDETERMINED,
        _ => EXIT_OK,
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e),
    };
    let opts = SuiteOptions {
        controls: cfg.controls(),
        bisect: BisectOptions { tol: cfg.tol, policy: cfg.policy(), ..Default::default() },
        seed: cfg.seed,
        ..Default::default()
    };
    let outcome = match run_suite(params, &opts) {
        Ok(o) => o,
        Err(e) => return fail("solve", &e),
    };
    let passed = outcome.all_passed();
    let code = emit(cfg, &Artifact::Verify { outcome });
    if code == EXIT_OK && !passed {
        EXIT_VERIFY
    } else {
        code
    }
}

pub fn cmd_transform(cfg: &RunConfig, lambda: f64, gamma: f64) -> i32 {
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail("usage", &e),
    };
    if params.dim() == 2 {
        eprintln!("error: usage: N=2 transform unsupported (the logarithmic kernel leaves V unbounded)");
        return EXIT_USAGE;
    }
    if !(lambda > 0.0 && gamma > 0.0) {
        eprintln!("error: usage: lambda and gamma must be positive, got {lambda}, {gamma}");
        return EXIT_USAGE;
    }
    let bracket = match find_bracket_with(params, cfg.controls(), cfg.policy(), BracketSearch::default()) {
        Ok(b) => b,
        Err(e) => return fail("bracket", &e),
    };
    let opts = BisectOptions { tol: cfg.tol, policy: cfg.policy(), ..Default::default() };
    let gs = match bisect_with(bracket, params, cfg.controls(), opts) {
        Ok(g) => g,
        Err(e) => return fail("bisection", &e),
    };
    match to_physical(&gs, lambda, gamma) {
        Ok((scaling, profile)) => emit(cfg, &Artifact::Transform { summary: gs.summary(), scaling, profile }),
        Err(e) => fail("transform", &e),
    }
}
