//! The `radial-sp` command line: configuration, subcommand dispatch and
//! artifact writing.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{EvolutionStart, MeshConfig, PotentialConfig, RunConfig, OUTPUT_DIR_ENV};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "radial-sp", version, about = "Radial Schrödinger–Poisson bound states, stability and dynamics")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set branch.n=2000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear bound states of -Δ + V: eigenvalue table and profiles.
    Linear(LinearArgs),
    /// Fixed-mass continuation from the linear seeds to the nonlinear problem.
    ContinueGamma(BranchArgs),
    /// Mass-versus-energy branch curves at γ = 1.
    #[command(name = "sweep-E")]
    SweepE(SweepArgs),
    /// L± and JL spectra with the stability verdict at one energy.
    Spectrum(SpectrumArgs),
    /// Largest unstable real part along one branch and the stability transition.
    Transition(TransitionArgs),
    /// Time evolution of a (perturbed) bound state.
    Evolve(EvolveArgs),
    /// Large-E scaling of a branch: log-log slope and rescaled profiles.
    RescaleCheck(RescaleArgs),
    /// Oracle suite: hydrogen, Sturm, Pohozaev and quadrature checks.
    Validate,
}

#[derive(Debug, Args)]
pub struct LinearArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    /// Comma-separated branch indices (zero-crossing counts).
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub gamma_step: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub branch: BranchArgs,
    #[arg(long)]
    pub e_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TransitionArgs {
    #[arg(long)]
    pub branch: Option<usize>,
    /// Comma-separated scan energies.
    #[arg(long)]
    pub energies: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub branch: Option<usize>,
    #[arg(long)]
    pub energy: Option<f64>,
    /// `desk` or `long`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// `nodal` or `fixed-point`.
    #[arg(long)]
    pub start: Option<String>,
}

#[derive(Debug, Args)]
pub struct RescaleArgs {
    #[arg(long)]
    pub branch: Option<usize>,
    #[arg(long)]
    pub e_max: Option<f64>,
}

fn push<T: ToString>(out: &mut Vec<(String, String)>, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        out.push((key.to_string(), v.to_string()));
    }
}

fn branch_overrides(a: &BranchArgs, out: &mut Vec<(String, String)>) {
    push(out, "branches", &a.branch);
    push(out, "branch.n", &a.n);
    push(out, "branch.r_max", &a.r_max);
    push(out, "gamma_step", &a.gamma_step);
    push(out, "mass", &a.mass);
}

impl Cli {
    /// `--set` pairs followed by subcommand flags (flags win).
    pub fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {s:?}")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(dir) = &self.output_dir {
            out.push(("output_dir".into(), dir.display().to_string()));
        }
        match &self.command {
            Command::Linear(a) => {
                push(&mut out, "linear.n", &a.n);
                push(&mut out, "linear.r_max", &a.r_max);
                push(&mut out, "linear.count", &a.count);
            }
            Command::ContinueGamma(a) => branch_overrides(a, &mut out),
            Command::SweepE(a) => {
                branch_overrides(&a.branch, &mut out);
                push(&mut out, "e_max", &a.e_max);
            }
            Command::Spectrum(a) => {
                push(&mut out, "branches", &a.branch);
                push(&mut out, "stability.energy", &a.energy);
                push(&mut out, "stability.n", &a.n);
                push(&mut out, "stability.r_max", &a.r_max);
            }
            Command::Transition(a) => {
                push(&mut out, "transition.branch", &a.branch);
                push(&mut out, "transition.energies", &a.energies);
                push(&mut out, "transition.tolerance", &a.tolerance);
                push(&mut out, "stability.n", &a.n);
            }
            Command::Evolve(a) => {
                // the profile resets all evolution parameters, so it goes first
                push(&mut out, "evolve.profile", &a.profile);
                push(&mut out, "evolve.branch", &a.branch);
                push(&mut out, "evolve.energy", &a.energy);
                push(&mut out, "evolve.dt", &a.dt);
                push(&mut out, "evolve.t_final", &a.t_final);
                push(&mut out, "evolve.epsilon", &a.epsilon);
                push(&mut out, "evolve.n", &a.n);
                push(&mut out, "evolve.r_max", &a.r_max);
                push(&mut out, "evolve.start", &a.start);
            }
            Command::RescaleCheck(a) => {
                push(&mut out, "branches", &a.branch);
                push(&mut out, "rescale.e_max", &a.e_max);
            }
            Command::Validate => {}
        }
        Ok(out)
    }
}

/// Parses, validates and runs; never touches the process exit status.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides()?)?;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("threads: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &cfg))
}

/// 0 on success, 2 for configuration errors, 1 for compute failures.
pub fn exit_code(result: &Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(_)) => ExitCode::from(2),
        Err(_) => ExitCode::from(1),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    exit_code(&result)
}
