use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sliceopt::{cmd_solve, cmd_sweep_gain, cmd_sweep_offloaders, cmd_validate};
use sliceopt_core::{InterSliceMode, SolverMethod};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Exhaustive,
    BestResponse,
    Auto,
}

impl From<MethodArg> for SolverMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exhaustive => SolverMethod::Exhaustive,
            MethodArg::BestResponse => SolverMethod::BestResponse,
            MethodArg::Auto => SolverMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InterArg {
    Optimal,
    Equal,
}

impl From<InterArg> for InterSliceMode {
    fn from(i: InterArg) -> Self {
        match i {
            InterArg::Optimal => InterSliceMode::Optimal,
            InterArg::Equal => InterSliceMode::EqualShare,
        }
    }
}

/// Offloading-decision and slice resource allocation solver.
#[derive(Parser)]
#[command(name = "sliceopt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance from a config and solve it.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "optimal")]
        inter: InterArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo sweep of the inter-slice performance gain.
    SweepGain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        runs: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        slices: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        wds: Vec<usize>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo sweep of offloader counts per slice.
    SweepOffloaders {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        runs: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        slices: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        wds: Vec<usize>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a solution document against its config and seed.
    Validate {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            config,
            seed,
            method,
            inter,
            out,
        } => cmd_solve(&config, seed, method.into(), inter.into(), &out),
        Command::SweepGain {
            config,
            seed,
            runs,
            slices,
            wds,
            method,
            out,
        } => cmd_sweep_gain(&config, &slices, &wds, runs, seed, method.into(), &out),
        Command::SweepOffloaders {
            config,
            seed,
            runs,
            slices,
            wds,
            method,
            out,
        } => cmd_sweep_offloaders(&config, &slices, &wds, runs, seed, method.into(), &out),
        Command::Validate {
            solution,
            config,
            seed,
        } => cmd_validate(&solution, &config, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
