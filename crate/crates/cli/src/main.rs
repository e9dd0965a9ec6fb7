//! Exit status: 0 when every check passes, 1 when a check fails or an
//! artifact cannot be written, 2 for usage and config errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use metspec::config::ExperimentConfig;
use metspec::error::CliError;
use metspec::{catalog, experiments, output};

const DEFAULT_OUT: &str = "metspec-out";

// stdout may be a closed pipe (`metspec list | head`); that is not an error
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "metspec",
    version,
    about = "Metric spectral experiments with pass/fail reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Output directory; beats `output.dir` in the config.
        #[arg(long, env = "METSPEC_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Print the experiment catalog.
    List,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::List => {
            let _ = write!(std::io::stdout(), "{}", catalog::render());
            Ok(true)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            experiments::validate(&cfg)?;
            say!(
                "{}: valid {} config",
                config.display(),
                cfg.experiment.name()
            );
            Ok(true)
        }
        Command::Run {
            config,
            seed,
            horizon,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(h) = horizon {
                if h == 0 {
                    return Err(CliError::Usage("--horizon must be at least 1".into()));
                }
                if cfg.horizon.is_none() {
                    return Err(CliError::Usage(format!(
                        "experiment `{}` has no horizon",
                        cfg.experiment.name()
                    )));
                }
                cfg.horizon = Some(h);
            }
            // --out (or its env var) wins over the config; the config's own dir
            // comes next, then the default
            let dir = out
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            cfg.output.dir = Some(dir.clone());
            let started = Instant::now();
            let outcome = experiments::run(&cfg)?;
            let wall = started.elapsed().as_secs_f64();
            let written = output::write_artifacts(&dir, &cfg, &outcome, wall)?;
            let failed: Vec<_> = outcome.checks.iter().filter(|c| !c.check.passed).collect();
            say!(
                "{}: {} ({} checks, {} failed, {wall:.2} s)",
                cfg.experiment.name(),
                if failed.is_empty() { "PASS" } else { "FAIL" },
                outcome.checks.len(),
                failed.len()
            );
            for c in &failed {
                say!(
                    "  failed [{}::{}] {} (observed {:e}, tolerance {:e}; {})",
                    c.module,
                    c.operation,
                    c.check.name,
                    c.check.observed,
                    c.check.tolerance,
                    c.check.oracle
                );
            }
            for path in written {
                say!("  wrote {}", path.display());
            }
            Ok(failed.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("metspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
