use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HYBRID_LINDBLAD_OUT";

/// `√3·π/2`, the default polar angle of the initial state.
pub const DEFAULT_THETA: f64 = 2.7206990463513265;
/// `√3·π`.
pub const DEFAULT_PHI: f64 = 5.441398092702653;
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-lindblad",
    version,
    about = "Hybrid Liouvillian spectra, exceptional points and postselected trajectories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Branch-tracked spectrum of L_H(q) over the rescaled rate γ/ω (CSV).
    Spectrum(SpectrumArgs),
    /// Locate an exceptional point in γ/ω inside [sweep-min, sweep-max] (JSON).
    Ep(EpArgs),
    /// Renormalized hybrid evolution of a pure qubit state (CSV of Bloch components).
    Evolve(EvolveArgs),
    /// Postselected quantum-jump ensemble (CSV of means and standard errors).
    Trajectories(TrajectoriesArgs),
    /// Closed forms against the numerical eigensolver (JSON report and deviations log).
    Verify(VerifyArgs),
    /// Repeat a run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Example1,
    Example2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Preset model.
    #[arg(long, value_enum, default_value_t = Preset::Example1)]
    pub model: Preset,
    /// Coherent frequency ω.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Primary output file; defaults to a fixed name inside $HYBRID_LINDBLAD_OUT (or the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the output.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Hybrid parameter q.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    /// First grid value of γ/ω.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub sweep_min: f64,
    /// Last grid value of γ/ω.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub sweep_max: f64,
    /// Number of grid points; 1 gives a single decomposition at sweep-min.
    #[arg(long, default_value_t = 301)]
    pub sweep_steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Lower end of the γ/ω bracket.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub sweep_min: f64,
    /// Upper end of the γ/ω bracket.
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub sweep_max: f64,
    /// Coarse scan points before refinement.
    #[arg(long, default_value_t = 201)]
    pub sweep_steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StateArgs {
    /// Polar angle of the initial state.
    #[arg(long, default_value_t = DEFAULT_THETA, allow_negative_numbers = true)]
    pub theta: f64,
    /// Azimuthal angle of the initial state.
    #[arg(long, default_value_t = DEFAULT_PHI, allow_negative_numbers = true)]
    pub phi: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Decay rate γ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    /// Final time; defaults to 5/ω.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of evenly spaced sample times on [0, t-max].
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("setup").required(true).args(["q", "eta"])))]
pub struct TrajectoriesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Two-detector setup: fraction q of each channel goes to the kept detector.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Single detector of efficiency η; records with a detected jump are discarded.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 5000)]
    pub n_traj: usize,
    /// Master seed; trajectory k uses stream k.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Step size; defaults to 1e-3·2π/ω, halved until the jump probability per step is at most 0.05.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Also write the jump log `<out stem>.events.csv`.
    #[arg(long)]
    pub events: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Preset::Example1)]
    pub model: Preset,
    /// Random parameter samples per check.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
