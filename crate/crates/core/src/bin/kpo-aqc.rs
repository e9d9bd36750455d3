use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kpo_aqc::driver::{
    run_batch, run_kappa_sweep, run_landscape, run_protocol, run_spectrum, run_strategy, Report, RunConfig,
};
use kpo_aqc::Error;

/// Adiabatic quantum computation with Kerr parametric oscillator networks.
///
/// Every subcommand reads a JSON run configuration and writes a JSON result
/// document plus CSV tables into the output directory.
#[derive(Parser)]
#[command(name = "kpo-aqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured protocol once.
    Solve(Common),
    /// Ground AQC plus vacuum-start excited AQC on every oscillator; keep the best.
    Strategy(Common),
    /// Ground AQC and the strategy on a batch of random instances.
    Batch {
        #[command(flatten)]
        common: Common,
        /// Run 1000 instances instead of the configured count.
        #[arg(long)]
        full: bool,
    },
    /// Success probability of the three protocols against the decay rate.
    SweepKappa(Common),
    /// Low-lying spectrum of the reduced Hamiltonian along the sweep.
    Spectrum(Common),
    /// Energies of all spin configurations of the instance.
    Landscape(Common),
}

#[derive(Args)]
struct Common {
    /// Run-configuration document.
    config: PathBuf,
    /// Output directory; overrides the `output` field of the configuration.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Config(Error),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Config(e)
        }
    }
}

fn emit<R: Report>(report: &R, dir: &Path) -> Result<(), Failure> {
    for p in report.write_to(dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, full) = match &cli.command {
        Command::Batch { common, full } => (common, *full),
        Command::Solve(c)
        | Command::Strategy(c)
        | Command::SweepKappa(c)
        | Command::Spectrum(c)
        | Command::Landscape(c) => (c, false),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    let mut cfg = RunConfig::load(&common.config)?;
    let dir = common
        .output
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Solve(_) => {
            let r = run_protocol(&cfg)?;
            let m = &r.result.metrics;
            println!(
                "{}: failure {:.6e}, residual energy {:.6e}",
                r.protocol.kind.label(),
                m.failure_probability,
                m.residual_energy
            );
            emit(&r, &dir)
        }
        Command::Strategy(_) => {
            let r = run_strategy(&cfg)?;
            let best = r.outcome.best();
            println!(
                "chosen {} (mode {}): failure {:.6e}, residual energy {:.6e}",
                best.protocol.kind.label(),
                best.protocol.special_mode.map_or("-".into(), |m| m.to_string()),
                best.result.metrics.failure_probability,
                best.result.metrics.residual_energy
            );
            emit(&r, &dir)
        }
        Command::Batch { .. } => {
            if full {
                cfg.batch.count = 1000;
            }
            let r = run_batch(&cfg)?;
            println!(
                "{} instances: max failure ground {:.4}, strategy {:.4}",
                r.rows.len(),
                r.max_ground_failure(),
                r.max_strategy_failure()
            );
            emit(&r, &dir)
        }
        Command::SweepKappa(_) => {
            let r = run_kappa_sweep(&cfg)?;
            for row in &r.rows {
                println!(
                    "kappa {:<8} {:<15} success {:.5} ± {:.5}",
                    row.kappa,
                    row.protocol.label(),
                    row.success,
                    row.std_error
                );
            }
            emit(&r, &dir)
        }
        Command::Spectrum(_) => {
            let r = run_spectrum(&cfg)?;
            let g = r.trace.min_gap;
            println!("min gap {:.6} at t = {:.3} (p = {:.4})", g.value, g.time, g.pump);
            emit(&r, &dir)
        }
        Command::Landscape(_) => {
            let r = run_landscape(&cfg)?;
            println!("{} configurations, {} local minima", r.rows.len(), r.local_minima.len());
            emit(&r, &dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(2)
        }
    }
}
