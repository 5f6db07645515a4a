//! `bartlett`: seeded, reproducible runs of the spectral and Monte Carlo
//! pipelines, writing CSV and JSON artifacts.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bartlett_core::Error;

#[derive(Parser, Debug, Serialize)]
#[command(name = "bartlett", version, about = "Bartlett spectra, number variances and hyperuniformity checks")]
pub struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "BARTLETT_OUT_DIR", default_value = "bartlett-out")]
    #[serde(skip)]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Tabulate a spectral measure and classify it
    Spectrum {
        #[command(flatten)]
        measure: MeasureArgs,
        /// Parameter grid start:stop:step (inclusive) or a comma list
        #[arg(long, default_value = "0:5:0.01")]
        grid: String,
        /// Decreasing ε grid for the ratio trace
        #[arg(long)]
        eps: Option<String>,
    },
    /// Spectral variances of radial statistics
    Variance {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_enum, default_value_t = Profile::Ball)]
        profile: Profile,
        /// Profile parameters: radii, Gaussian rates or heat times
        #[arg(long, default_value = "1:5:1")]
        params: String,
    },
    /// Draw one configuration
    Sample {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Monte Carlo number variances against the spectral prediction
    Nv {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, default_value = "1:4:1")]
        radii: String,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Heat-kernel criterion trace and equivalence with the spectral verdict
    Heat {
        #[command(flatten)]
        measure: MeasureArgs,
        /// Increasing τ grid, at most 50
        #[arg(long, default_value = "1,2,4,8,16,32")]
        taus: String,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Gaussian linear statistics of ball indicators
    Gaussian {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value = "1:3:0.5")]
        radii: String,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the acceptance suites
    Verify {
        /// `all` or a suite number 1-8
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Poisson,
    Ginibre,
    WeylHeisenberg,
    Bergman,
    Synthetic,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Ball,
    Gaussian,
    Heat,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Poisson,
    Ginibre,
    Gaf,
    Bergman,
}

#[derive(Args, Debug, Serialize)]
pub struct MeasureArgs {
    #[arg(long, value_enum)]
    pub kernel: Kernel,
    /// Space for poisson and synthetic measures (hyperbolic, euclidean1..euclidean4);
    /// the other kernels fix their own space
    #[arg(long, default_value = "hyperbolic")]
    pub space: String,
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    /// Weyl-Heisenberg λ
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub lambda_wh: f64,
    /// Weyl-Heisenberg Landau level
    #[arg(long, default_value_t = 0)]
    pub level: u32,
    /// Weyl-Heisenberg complex dimension
    #[arg(long, default_value_t = 1)]
    pub dim: u32,
    #[arg(long, default_value_t = 3.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cutoff: f64,
    /// Complementary-series mass as s0:mass (disk only), repeatable
    #[arg(long)]
    pub complementary: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Process,
    /// Space for the Poisson process
    #[arg(long, default_value = "hyperbolic")]
    pub space: String,
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    /// Ginibre matrix size
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// GAF polynomial degree (default: smallest admissible)
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Bergman mode cap (default: smallest admissible)
    #[arg(long)]
    pub mode_cap: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Domain(_) | Error::Json(_) => 2,
        Error::Numeric { .. } => 3,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match commands::run(&cli, &argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let mut err = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
            if let Error::Numeric { achieved, .. } = &e {
                err["achieved"] = serde_json::json!(achieved);
            }
            let body = serde_json::json!({ "error": err });
            eprintln!("{body}");
            let _ = std::fs::create_dir_all(&cli.out)
                .and_then(|_| std::fs::write(cli.out.join("error.json"), format!("{body:#}\n")));
            ExitCode::from(exit_code(&e))
        }
    }
}
