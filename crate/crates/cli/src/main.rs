mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "decay", version, about = "Kramers-diffusion half-lives of heavy nuclei")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Variant {
    /// Daughter radius term built from A − Z_cl
    AsPrinted,
    /// Daughter radius term built from A − A_cl
    AMinusAcl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Unit,
    Sigma,
}

#[derive(Debug, Args)]
pub struct Common {
    /// `embedded` or a nuclide CSV file
    #[arg(long, default_value = "embedded")]
    pub data: String,
    #[arg(long, value_enum, default_value = "a-minus-acl")]
    pub variant: Variant,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Model half-lives for every record, with per-class plot data
    Predict {
        #[command(flatten)]
        common: Common,
        /// Parameter file, or `table4`
        #[arg(long, default_value = "table4")]
        params: String,
        #[arg(long, default_value = "predict.csv")]
        out: PathBuf,
    },
    /// Fit the 20 parameters to the fit records
    Fit {
        #[command(flatten)]
        common: Common,
        /// Starting point: a parameter file, `zero` or `table4`
        #[arg(long, default_value = "table4")]
        init: String,
        #[arg(long, value_enum, default_value = "unit")]
        weighting: WeightingArg,
        /// Tikhonov weight pulling toward the starting point
        #[arg(long, default_value_t = 0.0)]
        reg: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Relative Gaussian perturbation applied to the starting point
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "fit.params")]
        out: PathBuf,
    },
    /// Superheavy validation records
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "table4")]
        params: String,
        #[arg(long, default_value = "validate.csv")]
        out: PathBuf,
    },
    /// Solve for the kinetic energy of the predict records
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "table4")]
        params: String,
        #[arg(long, default_value = "invert.csv")]
        out: PathBuf,
    },
    /// Kramers, Gamow and Geiger–Nuttall side by side for α emitters
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "table4")]
        params: String,
        #[arg(long, default_value = "compare.csv")]
        out: PathBuf,
    },
    /// Langevin escape over a cubic barrier
    Simulate {
        /// Barrier height in units of the temperature
        #[arg(long, default_value_t = 6.0)]
        barrier: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Friction γ (with m = ω = 1 this is also β/ω_max)
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        traj: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "simulate.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Predict { common, params, out } => commands::predict(&common, &params, &out),
        Command::Fit {
            common,
            init,
            weighting,
            reg,
            max_iter,
            perturb,
            seed,
            out,
        } => commands::fit(
            &common,
            &commands::FitArgs {
                init,
                weighting,
                reg,
                max_iter,
                perturb,
                seed,
            },
            &out,
        ),
        Command::Validate { common, params, out } => commands::validate(&common, &params, &out),
        Command::Invert { common, params, out } => commands::invert(&common, &params, &out),
        Command::Compare { common, params, out } => commands::compare(&common, &params, &out),
        Command::Simulate {
            barrier,
            eps,
            gamma,
            traj,
            seed,
            out,
        } => commands::simulate(barrier, eps, gamma, traj, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
