//! `contact3`: verify contact metric structures on three-dimensional charts.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 for
//! usage or input errors.

mod commands;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Number of sample points.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: u64,
    /// Seed of the point sampler.
    #[arg(long, global = true, env = "CONTACT3_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    /// Step of the finite-difference derivative check.
    #[arg(long = "fd-step", global = true, default_value_t = 1e-6, value_parser = positive)]
    pub fd_step: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Print per-point tables in text output.
    #[arg(long, global = true)]
    pub verbose: bool,
}

impl RunConfig {
    pub fn n_points(&self) -> usize {
        usize::try_from(self.points).unwrap_or(usize::MAX)
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {v}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "contact3", version, about = "Verify contact metric structures on three-dimensional charts")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the contact metric axioms, curvature identities and derivatives.
    Verify { spec: PathBuf },
    /// Extract (kappa, mu, nu) pointwise and classify.
    Nullity { spec: PathBuf },
    /// Apply a D-homothetic deformation and check the transformation laws.
    Dhomothety {
        spec: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Write the deformed structure file to this path.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Generate a classification chart and verify it.
    Chart(ChartArgs),
    /// Run the built-in catalog of structures and compare with stated values.
    Examples,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    /// Which frame family to build: 1 (φe = ∂y) or 2 (e = ∂y).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,
    /// Function of z; 1/k3 must be a Laurent polynomial.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub k3: String,
    /// Function of z.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub r: String,
    /// Function of z.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: String,
    /// Function of y and z.
    #[arg(long = "H", default_value = "0", allow_hyphen_values = true)]
    pub h: String,
    /// Integration constant added to lam_of_z.
    #[arg(long = "lambda-const", default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda_const: f64,
    /// Sampling interval for one coordinate, as `coord=lo,hi`; repeatable.
    #[arg(long = "box", value_name = "COORD=LO,HI", allow_hyphen_values = true)]
    pub boxes: Vec<String>,
    /// Write the generated structure file to this path.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { spec } => commands::verify(spec, &cli.config),
        Command::Nullity { spec } => commands::nullity(spec, &cli.config),
        Command::Dhomothety { spec, alpha, emit } => commands::dhomothety(spec, *alpha, emit.as_deref(), &cli.config),
        Command::Chart(args) => commands::chart(args, &cli.config),
        Command::Examples => commands::examples(&cli.config),
    };
    match result {
        Ok(out) => {
            print!("{}", out.body);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
