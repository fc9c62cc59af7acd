use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use wpvol::arith::{parse_rat, Rat};
use wpvol::lab::{describe, run_experiment, Format, LabConfig, PartialConfig, CACHE_ENV, EXPERIMENTS};
use wpvol::random_model::CutoffLength;
use wpvol::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_CHECK: u8 = 3;

/// Exact Weil-Petersson volume experiments.
#[derive(Debug, Parser)]
#[command(name = "wplab", version)]
struct Cli {
    /// Experiment to run.
    experiment: String,
    /// Largest dimension 3g-3+n of a signature that may be computed.
    #[arg(long)]
    budget: Option<u32>,
    /// Significant digits of decimal output (at least 15).
    #[arg(long)]
    digits: Option<u32>,
    /// Smallest genus of the grid.
    #[arg(long)]
    gmin: Option<u32>,
    /// Largest genus of the grid.
    #[arg(long)]
    gmax: Option<u32>,
    /// Smallest puncture count of the grid.
    #[arg(long)]
    nmin: Option<u32>,
    /// Largest puncture count of the grid.
    #[arg(long)]
    nmax: Option<u32>,
    /// Puncture growth rate in n = floor(a sqrt g).
    #[arg(long, value_parser = rat_arg)]
    a: Option<Rat>,
    /// Cheeger-type constant C.
    #[arg(long = "C", value_parser = rat_arg)]
    c: Option<Rat>,
    /// Exponent parameter u of the m >= 2 volume sum.
    #[arg(long, value_parser = rat_arg)]
    u: Option<Rat>,
    /// Cut-off length, a rational optionally followed by `pi`.
    #[arg(long = "L", value_parser = cutoff_arg)]
    l: Option<CutoffLength>,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format: csv or json.
    #[arg(long, value_parser = format_arg)]
    format: Option<Format>,
    /// Worker threads for warming and grid evaluation.
    #[arg(long)]
    threads: Option<usize>,
    /// Random seed, recorded in the configuration. No current experiment samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory of the persisted bracket cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn cutoff_arg(s: &str) -> Result<CutoffLength, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn format_arg(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn after_help() -> String {
    let mut s = String::from(
        "Output columns: experiment,input,exact,numeric,reference,deviation,statistic,status,warnings\n\
         JSON output is an array of objects with the same keys.\n\nExperiments:\n",
    );
    for name in EXPERIMENTS {
        s.push_str(&format!("  {name}\n      {}\n", describe(name).unwrap_or("")));
    }
    s.push_str(&format!(
        "\nPrecedence: flag > config file > {CACHE_ENV} (cache directory) > default.\n\
         Exit codes: 0 success, 1 usage, 2 budget exceeded, 3 failed check or internal error."
    ));
    s
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::UnknownExperiment { .. }
        | Error::Parse { .. }
        | Error::OutOfRange { .. }
        | Error::Malformed { .. }
        | Error::UnstableSignature { .. }
        | Error::Arity { .. }
        | Error::InvalidSplit { .. } => EXIT_USAGE,
        _ => EXIT_CHECK,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let flags = PartialConfig {
        budget: cli.budget,
        digits: cli.digits,
        cache_dir: cli.cache_dir,
        threads: cli.threads,
        seed: cli.seed,
        gmin: cli.gmin,
        gmax: cli.gmax,
        nmin: cli.nmin,
        nmax: cli.nmax,
        a: cli.a,
        c: cli.c,
        u: cli.u,
        l: cli.l,
        format: cli.format,
    };
    let file = cli.config.as_deref().map(PartialConfig::read).transpose()?;
    let cfg = LabConfig::resolve(flags, file, std::env::var(CACHE_ENV).ok())?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let artifact = run_experiment(&cli.experiment, &cfg)?;
    for note in &artifact.notes {
        eprintln!("{note}");
    }
    let text = artifact.render(cfg.format)?;
    match &cli.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    if artifact.all_pass() {
        Ok(0)
    } else {
        eprintln!("{} of {} rows failed", artifact.failures(), artifact.rows.len());
        Ok(EXIT_CHECK)
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().after_long_help(after_help()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
