use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcorr::bloch_analysis::AlignedMeasure;
use qcorr::optim::OptimConfig;
use qcorr_cli::checks::{run_suite, Suite};
use qcorr_cli::family::{write_family, Family, FamilyParams};
use qcorr_cli::measure::measure_text;
use qcorr_cli::scan::{parse_measures, parse_rank, run_scan, write_csv, ScanConfig};
use qcorr_cli::{with_threads, CliError, CliResult};

#[derive(Parser)]
#[command(name = "qcorr", version, about = "Entropic measures of nonclassical correlations")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OptimArgs {
    /// θ grid points per qubit.
    #[arg(long)]
    grid_theta: Option<usize>,
    /// φ grid points per qubit.
    #[arg(long)]
    grid_phi: Option<usize>,
    /// Random Nelder–Mead restarts per search.
    #[arg(long)]
    restarts: Option<usize>,
    /// Simplex spread at which a search stops.
    #[arg(long)]
    tol: Option<f64>,
}

impl OptimArgs {
    fn config(&self) -> CliResult<OptimConfig> {
        let mut c = OptimConfig::default();
        if let Some(v) = self.grid_theta {
            c.grid_theta = v;
        }
        if let Some(v) = self.grid_phi {
            c.grid_phi = v;
        }
        if let Some(v) = self.restarts {
            c.restarts = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if c.grid_theta < 2 || c.grid_phi < 1 {
            return Err(CliError::Input("grid needs at least 2 θ and 1 φ points".into()));
        }
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            return Err(CliError::Input(format!("tolerance must be positive, got {}", c.tol)));
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// JSON report for one state file ("-" reads stdin).
    Measure {
        state: PathBuf,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// CSV scan over seeded random two-qubit states.
    Scan {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// "full" or 1..=4.
        #[arg(long, default_value = "full")]
        rank: String,
        /// "all" or a comma-separated list of measure names.
        #[arg(long, default_value = "all")]
        measures: String,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// CSV rows for a named family: fig5, bell, cq-triangle, cq-tetrahedron.
    Family {
        name: String,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Measure whose optimal axes are aligned: wpm, m2b_ab, m2b_ba, m3b.
        #[arg(long, default_value = "wpm")]
        measure: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Randomized property suite: povm-ineq, ensemble-ineq, fine-graining, demon, orderings.
    Check {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        optim: OptimArgs,
    },
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_input(path: &PathBuf) -> CliResult<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)?.read_to_string(&mut text)?;
    }
    Ok(text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Measure { state, optim } => {
            let report = measure_text(&read_input(&state)?, &optim.config()?)?;
            writeln!(io::stdout().lock(), "{report}")?;
        }
        Command::Scan {
            n,
            seed,
            rank,
            measures,
            out,
            optim,
        } => {
            let config = ScanConfig {
                n_states: n,
                seed,
                rank: parse_rank(&rank)?,
                measures: parse_measures(&measures)?,
                optim: optim.config()?,
            };
            let rows = with_threads(cli.threads, || run_scan(&config))??;
            write_csv(output(&out)?, &config, &rows)?;
        }
        Command::Family {
            name,
            points,
            measure,
            out,
            optim,
        } => {
            let family = Family::from_name(&name)?;
            let params = FamilyParams {
                points,
                measure: AlignedMeasure::from_name(&measure)
                    .ok_or_else(|| CliError::Input(format!("{measure:?} has no measurement axes to align")))?,
                optim: optim.config()?,
            };
            write_family(output(&out)?, family, &params)?;
        }
        Command::Check {
            suite,
            trials,
            seed,
            optim,
        } => {
            let suite = Suite::from_name(&suite)?;
            let trials = trials.unwrap_or(suite.default_trials());
            let optim = optim.config()?;
            let report = with_threads(cli.threads, || run_suite(suite, trials, seed, &optim))??;
            writeln!(io::stdout().lock(), "{report}")?;
            if !report.passed() {
                return Err(CliError::Violation(format!(
                    "{} failed in trials {:?}",
                    suite.name(),
                    report.failing_trials
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcorr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
