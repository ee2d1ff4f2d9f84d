use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hatcat",
    version,
    about = "Hat states, detection runs and relative-phase cats in condensate arrays"
)]
pub struct Cli {
    /// Worker threads for parallel stages (defaults to the number of cores).
    #[arg(long, global = true, env = "HATCAT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasi-momentum occupation distribution of |N,N,N>.
    Hat(HatArgs),
    /// Bose-Hubbard ground states and their quasi-momentum profiles.
    Ground(GroundArgs),
    /// Sequential atom detections starting from |N,...,N>.
    Detect(DetectArgs),
    /// Joint relative-phase distribution of a run's final state.
    Phase(PhaseArgs),
    /// Number distribution of a run's final state and its fringe report.
    Number(NumberArgs),
    /// Coherent-state detection pattern and a phase-swap check.
    Coherent(CoherentArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct HatArgs {
    #[arg(long, default_value_t = 3)]
    pub sites: usize,
    #[arg(long, default_value_t = 20)]
    pub atoms_per_site: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub xi: f64,
    #[arg(long, default_value = "hat.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GroundArgs {
    #[arg(long, default_value_t = 3)]
    pub sites: usize,
    #[arg(long, default_value_t = 60)]
    pub atoms: u32,
    /// Comma-separated U/J values, solved in parallel.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub uj: Vec<f64>,
    #[arg(long, default_value = "periodic", value_parser = ["periodic", "open"])]
    pub boundary: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub xi: f64,
    /// With several U/J values each file gets a `_uj<value>` suffix.
    #[arg(long, default_value = "ground.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[arg(long, default_value_t = 3)]
    pub sites: usize,
    #[arg(long, default_value_t = 100)]
    pub atoms_per_site: u32,
    #[arg(long, default_value_t = 100)]
    pub detections: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `delta:ETA`, `gauss:MEAN,SD` or `table:V=W,...`.
    #[arg(long, default_value = "delta:1")]
    pub eta_dist: String,
    /// Points of the tabulated single-detection density.
    #[arg(long, default_value_t = 1024)]
    pub grid_points: usize,
    #[arg(long, default_value = "run.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Points per phase axis.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Peak report goes next to it as `<stem>.peaks.json`.
    #[arg(long, default_value = "phase.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct NumberArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Phase grid used to locate the cat peaks for the fringe prediction.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Fringe report goes next to it as `<stem>.fringe.json`.
    #[arg(long, default_value = "number.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CoherentArgs {
    /// Relative phases φ_(j+1) − φ_j, comma-separated (n−1 values for n modes).
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0.5,-1.2,2.0"
    )]
    pub phases: Vec<f64>,
    /// Washout factor F(η) in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub f_value: f64,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Entries of the relative-phase list to exchange, `first-last` or `I,J`.
    #[arg(long, default_value = "first-last")]
    pub swap: String,
    #[arg(long, default_value = "coherent.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
