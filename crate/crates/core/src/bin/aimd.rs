use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aimd_core::cli::{
    cmd_simulate, cmd_spectral, cmd_stochastic, cmd_sweep, cmd_verify, commands::parse_values,
    SimulateArgs, StochasticArgs, SweepArgs, SweepParam, VerifyArgs, OUT_DIR_ENV,
};

/// AIMD admission control and resource allocation simulator.
#[derive(Parser)]
#[command(name = "aimd", version)]
struct Cli {
    /// Base output directory; each subcommand writes into `<out-dir>/<subcommand>`
    /// unless `--out` is given.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form run: cycles.csv, trace.csv, report.json.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = 30)]
        cycles: usize,
        #[arg(long, default_value_t = 50)]
        trace_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum and Schur certificate of the aggregate map.
    Spectral {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the closed-form run with a forward-Euler integration.
    Verify {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 20)]
        cycles: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Exponential inter-arrival run: cycles.csv, arrivals.csv, report.json.
    Stochastic {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One run per parameter value: summary.csv.
    Sweep {
        config: PathBuf,
        /// alpha-scale, beta or lambda.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values, e.g. `1,2,4`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 60)]
        cycles: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_for = |explicit: Option<PathBuf>, name: &str| explicit.unwrap_or_else(|| cli.out_dir.join(name));
    let mut stdout = io::stdout();
    let result = match cli.command {
        Command::Simulate { config, cycles, trace_samples, out } => cmd_simulate(
            &SimulateArgs { config, cycles, trace_samples, out: out_for(out, "simulate") },
            &mut stdout,
        ),
        Command::Spectral { config, out } => cmd_spectral(&config, &out_for(out, "spectral"), &mut stdout),
        Command::Verify { config, dt, cycles, tol } => {
            cmd_verify(&VerifyArgs { config, dt, cycles, tol }, &mut stdout)
        }
        Command::Stochastic { config, seed, horizon, out } => cmd_stochastic(
            &StochasticArgs { config, seed, horizon, out: out_for(out, "stochastic") },
            &mut stdout,
        ),
        Command::Sweep { config, param, range, cycles, out } => parse_values(&range).and_then(|values| {
            cmd_sweep(&SweepArgs { config, param, values, cycles, out: out_for(out, "sweep") }, &mut stdout)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(aimd_core::cli::EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
