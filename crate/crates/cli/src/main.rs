use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;
use ucgl_core::{roots, run_suite, Config, Error, GroupoidPoint, Suite};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SEARCH: u8 = 3;

#[derive(Parser)]
#[command(name = "ucgl", version, about = "Verification suites for the universal centralizer of SL(n+1, C)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the root sets R1, R1p and write them as JSON.
    DeriveRoots {
        #[arg(long)]
        n: usize,
        /// Search budget in seconds.
        #[arg(long, default_value_t = 60)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a check suite and emit a report.
    Verify {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_suite)]
        suite: Option<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample count for every check.
        #[arg(long)]
        samples: Option<usize>,
        /// Tolerance for the exact-identity checks.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file with default settings; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Root-set search budget in seconds.
        #[arg(long)]
        budget: Option<u64>,
        /// Leave the elapsed time out of the report.
        #[arg(long)]
        no_timing: bool,
    },
    /// Write sampled points of S^local as JSON.
    SampleSlocal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SearchFailure { .. } => EXIT_SEARCH,
        Error::InvalidDimension(_) | Error::PreconditionViolation(_) | Error::Serde(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::DeriveRoots { n, budget, out } => {
            let found = roots::derive_root_sets(n, Duration::from_secs(budget))?;
            roots::write_root_file(&out, &found)?;
            eprintln!("n = {n}: R1 = {:?}, R1p = {:?}, {} survivors", found.r1, found.r1p, found.survivor_count);
            Ok(0)
        }
        Command::Verify { n, suite, seed, samples, tol, format, out, config, budget, no_timing } => {
            let mut cfg = match &config {
                Some(path) => Config::from_file(path)?,
                None => Config::default(),
            };
            if config.is_none() && n.is_none() {
                return Err(Error::PreconditionViolation("--n is required without --config".into()));
            }
            cfg.n = n.unwrap_or(cfg.n);
            cfg.suite = suite.unwrap_or(cfg.suite);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.samples = samples.or(cfg.samples);
            cfg.tol = tol.or(cfg.tol);
            cfg.budget_secs = budget.unwrap_or(cfg.budget_secs);
            cfg.include_timing &= !no_timing;
            let report = run_suite(&cfg)?;
            let text = match format {
                Format::Json => report.to_json()?,
                Format::Md => report.to_markdown(),
            };
            write_output(out.as_ref(), &text)?;
            for c in report.failures() {
                eprintln!("FAIL {}: {:e} (tol {:e})", c.name, c.max_residual, c.tol);
            }
            Ok(if report.passed() { 0 } else { EXIT_FAIL })
        }
        Command::SampleSlocal { n, seed, count, out } => {
            let sec = roots::section(n, Duration::from_secs(60), &roots::default_cache_dir())?;
            let points: Vec<GroupoidPoint> = sec.sample_slocal_batch(seed, count)?;
            std::fs::write(&out, serde_json::to_string_pretty(&points)? + "\n")?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
