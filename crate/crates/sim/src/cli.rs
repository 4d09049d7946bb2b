//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, FigureKind, Outcome};
use crate::config::{DenoiserKind, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::pool::Pool;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "DENOISE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cbdenoise", version, about = "Compression-based denoising experiments")]
pub struct Args {
    /// Configuration file (`section.key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// CSV output path.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Window radius / block order
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Block length
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Rate above the matched rate, in bits per symbol.
    #[arg(long = "rate-slack", global = true)]
    pub rate_slack: Option<f64>,
    /// Monte Carlo trials (also used per figure grid point)
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerical checks of the structural results.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Denoising experiments.
    Run {
        #[command(subcommand)]
        what: Run,
    },
    /// Data for the comparison figures.
    Figure {
        #[arg(value_enum)]
        name: FigureKind,
        /// Also write a gnuplot script for the CSV.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Closed forms of the Gaussian example and the exponential-form test.
    Gaussian {
        /// Signal-to-noise ratio of the scalar Gaussian channel
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Rate at the matched level against the block-entropy expression.
    Rd {
        /// Run the standard grid of sources and channels instead of the
        /// configured pair.
        #[arg(long)]
        suite: bool,
    },
    /// Optimal joint against the true source-observation joint.
    Achiever {
        /// Run the standard grid, including rank-deficient channels.
        #[arg(long)]
        suite: bool,
    },
    /// Markov-violation bound on an exactly enumerated small code.
    Lemma,
    /// Decay of the mixing coefficient.
    Mixing,
}

#[derive(Debug, Subcommand)]
pub enum Run {
    /// Denoise simulated blocks and compare against the posterior baselines.
    Denoise {
        /// Overrides `run.denoiser`.
        #[arg(long, value_enum)]
        denoiser: Option<DenoiserKind>,
    },
}

/// Loads the configuration and applies command-line and environment overrides.
pub fn load_config(args: &Args, seed_env: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::parse_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = args.k {
        cfg.run.k = k;
    }
    if let Some(n) = args.n {
        cfg.run.n = n;
    }
    if let Some(s) = args.rate_slack {
        cfg.run.rate_slack_bits = s;
    }
    if let Some(t) = args.trials {
        cfg.run.trials = t;
        cfg.figure.trials = t;
    }
    if let Some(o) = &args.output {
        cfg.run.output = Some(o.clone());
    }
    if let Command::Run {
        what: Run::Denoise { denoiser: Some(d) },
    } = &args.command
    {
        cfg.run.denoiser = *d;
    }
    if let Some(s) = seed_env {
        cfg.run.seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("{SEED_ENV} = {s:?} is not an unsigned integer")))?;
    }
    if args.trials == Some(0) {
        return Err(CliError::Invalid("--trials must be positive".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the selected subcommand.
pub fn execute(args: &Args, cfg: &ExperimentConfig) -> Result<Outcome> {
    let pool = Pool::new(args.threads)?;
    match &args.command {
        Command::Verify { what } => match what {
            Verify::Rd { suite } => {
                let inst = instances(cfg, *suite, false)?;
                commands::verify_rd(&inst, cfg.run.k, cfg)
            }
            Verify::Achiever { suite } => {
                let inst = instances(cfg, *suite, true)?;
                commands::verify_achiever(&inst, cfg.run.k, cfg)
            }
            Verify::Lemma => commands::verify_lemma(cfg),
            Verify::Mixing => commands::verify_mixing(cfg, &pool),
        },
        Command::Run {
            what: Run::Denoise { .. },
        } => commands::run_denoise(cfg, &pool),
        Command::Figure { name, .. } => commands::figure(*name, cfg, &pool),
        Command::Gaussian { gamma } => commands::gaussian(*gamma),
    }
}

fn instances(cfg: &ExperimentConfig, suite: bool, deficient: bool) -> Result<Vec<commands::Instance>> {
    if suite {
        commands::standard_instances(deficient)
    } else {
        Ok(vec![commands::configured_instance(cfg)?])
    }
}

fn write_artifacts(args: &Args, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    if let Some(path) = &cfg.run.output {
        outcome.table.save(path)?;
        if let Command::Figure {
            name,
            gnuplot: Some(script),
        } = &args.command
        {
            let text = commands::gnuplot_script(*name, &path.display().to_string());
            std::fs::write(script, text).map_err(|e| CliError::io(script, e))?;
        }
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Summaries go to `out`, errors to `err`.
pub fn main_with<I, T>(argv: I, seed_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = load_config(&args, seed_env).and_then(|cfg| {
        let outcome = execute(&args, &cfg)?;
        write_artifacts(&args, &cfg, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for c in &outcome.checks {
                let _ = writeln!(out, "{c}");
            }
            if outcome.passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
