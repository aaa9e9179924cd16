use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use susyx_cli::suites::{self, CliError, CliResult, Suite, FEASIBLE_N};
use susyx_cli::{init_threads, NRange, RunConfig};
use susyx_core::bethe::SolverConfig;
use susyx_core::CheckReport;

/// Verification harness for the supersymmetric open XXZ chain at η = 2πi/3.
#[derive(Parser)]
#[command(name = "susyx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an identity-check suite.
    Verify {
        /// susy, reflection, theorem1, deltas, transfer, pairing or all
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve the Bethe equations or check root sets from a file.
    Bethe {
        #[command(subcommand)]
        action: BetheAction,
    },
    /// Zero-energy singlet per chain length.
    Vacuum {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Singlet/doublet split of the spectrum per chain length.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rank and nullity of the supercharge per chain length.
    Dims {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum BetheAction {
    /// Multistart Newton solve; writes a root file.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Root file destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bethe residual plus eigenvector and energy checks.
    Check {
        #[arg(long)]
        roots: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Pairing checks against the set augmented by η.
    Pair {
        #[arg(long)]
        roots: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Chain lengths, `5` or `2..6` (inclusive).
    #[arg(long = "n")]
    n: Option<NRange>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tolerance override, `check_name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected check_name=value")?;
    let v: f64 = v.parse().map_err(|e| format!("bad tolerance {v:?}: {e}"))?;
    Ok((k.to_string(), v))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl RunArgs {
    fn resolve(&self, default_n: NRange) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json(&read(p)?).map_err(CliError::Usage)?,
            None => RunConfig { n_range: default_n, ..RunConfig::default() },
        };
        if let Some(n) = self.n {
            cfg.n_range = n;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.output_path = self.out.clone();
        }
        cfg.tol.extend(self.tol.iter().cloned());
        cfg.validate().map_err(CliError::Usage)?;
        if cfg.n_range.hi > FEASIBLE_N {
            eprintln!("warning: n = {} is above the desk-scale bound {FEASIBLE_N}; expect long runtimes", cfg.n_range.hi);
        }
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(command: &str, cfg: &RunConfig, reports: Vec<CheckReport>) -> CliResult<bool> {
    let reports = suites::apply_overrides(reports, &cfg.tol);
    emit(&suites::render(command, cfg.seed, &reports), cfg.output_path.as_deref())?;
    Ok(reports.iter().all(|r| r.pass))
}

fn range(lo: usize, hi: usize) -> NRange {
    NRange { lo, hi }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Verify { suite, run } => {
            let cfg = run.resolve(range(2, 6))?;
            let reports = suites::run_suite(suite, &cfg)?;
            finish(&format!("verify {}", suite.name()), &cfg, reports)
        }
        Command::Vacuum { run } => {
            let cfg = run.resolve(range(1, 8))?;
            finish("vacuum", &cfg, suites::vacuum(cfg.n_range)?)
        }
        Command::Spectrum { run } => {
            let cfg = run.resolve(range(2, 8))?;
            finish("spectrum", &cfg, suites::spectrum(cfg.n_range)?)
        }
        Command::Dims { run } => {
            let cfg = run.resolve(range(2, 10))?;
            finish("dims", &cfg, suites::dims(cfg.n_range)?)
        }
        Command::Bethe { action } => match action {
            BetheAction::Solve { n, m, starts, seed, out } => {
                let solver = SolverConfig { starts, seed, ..SolverConfig::default() };
                let (roots, reports) = suites::bethe_solve(n, m, &solver)?;
                emit(&format!("{roots}\n"), out.as_deref())?;
                eprint!("{}", suites::render("bethe solve", seed, &reports));
                Ok(true)
            }
            BetheAction::Check { roots, run } => {
                let cfg = run.resolve(range(2, 6))?;
                let sets = suites::parse_roots(&read(&roots)?)?;
                finish("bethe check", &cfg, suites::bethe_check(&sets, cfg.samples.min(10), cfg.seed)?)
            }
            BetheAction::Pair { roots, run } => {
                let cfg = run.resolve(range(2, 6))?;
                let sets = suites::parse_roots(&read(&roots)?)?;
                finish("bethe pair", &cfg, suites::bethe_pair(&sets, cfg.samples.min(10), cfg.seed)?)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("usage error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
