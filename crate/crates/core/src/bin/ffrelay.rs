use clap::{Parser, Subcommand};
use ffrelay::harness::{self, Experiment, ExperimentSpec};
use ffrelay::{Config, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ffrelay", version, about = "Filter-and-forward relay MIMO-OFDM design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write a CSV plus a JSON config sidecar.
    Run {
        /// System configuration JSON; defaults to the 16-subcarrier 2x2 reference.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        experiment: String,
        /// Comma-separated relay powers in dB, or tap counts for mse_vs_taps.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sweep: Vec<f64>,
        /// Relay tap counts evaluated at every relay-power point.
        #[arg(long, value_delimiter = ',')]
        taps: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative weighted-MSE change that stops the alternation.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Run the equivalence and oracle suite.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidDimension(_) | Error::Json(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn validate(seed: u64) -> Result<(), Failure> {
    let report = harness::validate(seed)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Internal("validation failed".into()))
    }
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { seed } => validate(seed),
        Command::Run { config, experiment, sweep, taps, trials, seed, out, tol, max_iters, restarts } => {
            let experiment: Experiment = experiment.parse()?;
            if experiment == Experiment::Validate {
                return validate(seed);
            }
            let base = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
                    Config::from_json(&text)?
                }
                None => Config::reference(),
            };
            let out = out.ok_or_else(|| Failure::Usage("--out is required".into()))?;
            let mut spec = ExperimentSpec::new(experiment, base, sweep, trials, seed, out);
            spec.taps = taps;
            spec.tol = tol.unwrap_or(spec.tol);
            spec.max_iters = max_iters.unwrap_or(spec.max_iters);
            spec.restarts = restarts.unwrap_or(spec.restarts);
            spec.validate()?;
            let output = harness::run_experiment(&spec)?;
            print!("{}", harness::format_summary(&spec, &output.summary));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
