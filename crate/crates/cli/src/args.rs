use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "fracsolve", version, about = "Fractional ODE solves and work-precision sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one case and write the trajectory as CSV.
    Solve(SolveArgs),
    /// Sweep h = 2^-n over methods and record error against wall time.
    Bench(BenchArgs),
    /// Evaluate E^gamma_{alpha,beta}(z) for real z.
    #[command(allow_negative_numbers = true)]
    Mittleff(MittleffArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub case: String,
    #[arg(long)]
    pub method: String,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: f64,
    /// Final time; defaults to the case's own.
    #[arg(long)]
    pub tf: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate memory sums with blocked FFT convolutions.
    #[arg(long)]
    pub fft: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub case: String,
    /// Comma-separated method tokens; every applicable method when absent.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, default_value_t = 2)]
    pub nmin: i32,
    #[arg(long, default_value_t = 7)]
    pub nmax: i32,
    #[arg(long, default_value = "final_time")]
    pub metric: String,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// `.json` or `.csv` destination; JSON on standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub fft: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MittleffArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub z: f64,
}
