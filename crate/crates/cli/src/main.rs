mod commands;
mod recipes;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use treescramble::Execution;

use settings::{load_config, CliError, CliResult, Sink};

/// Power-of-two coupled spin models: magnon light cones, quench entanglement,
/// OTOCs, level statistics, semiclassical scrambling and cavity budgets.
#[derive(Debug, Parser)]
#[command(name = "treescramble", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV and summary files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: all cores; 1 runs sequentially).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for stochastic methods.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling graph edge list and pairwise distances.
    Graph(GraphArgs),
    /// Single-magnon occupations and the dispersion table.
    Magnon(MagnonArgs),
    /// Threshold times and light-cone bound fits.
    Lightcone(LightconeArgs),
    /// Entanglement entropy after a quench from the x-polarized state.
    #[command(name = "quench-ee")]
    QuenchEe(QuenchArgs),
    /// Infinite-temperature OTOCs by exact diagonalization.
    #[command(name = "otoc-ed")]
    OtocEd(OtocArgs),
    /// Level-spacing statistics of symmetry-resolved sectors.
    Levels(LevelsArgs),
    /// Classical sensitivity, Lyapunov exponents and scrambling-time fit.
    Semiclassical(SemiclassicalArgs),
    /// Cooperativity requirements and drive waveforms.
    Expdesign(ExpdesignArgs),
    /// Run a documented desk-scale recipe for a figure analogue.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Default, Args, Clone)]
pub struct ModelArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Coupling scale.
    #[arg(long)]
    pub j0: Option<f64>,
    /// `periodic` or `open`.
    #[arg(long)]
    pub boundary: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also write every pairwise distance.
    #[arg(long)]
    pub distances: bool,
}

#[derive(Debug, Default, Args)]
pub struct MagnonArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Site of the initial excitation (default N/2).
    #[arg(long)]
    pub source: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Order occupation columns by Monna-mapped site.
    #[arg(long)]
    pub monna: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceChoice {
    /// Physical for s <= 0, Monna for s > 0.
    Natural,
    Physical,
    Monna,
    Both,
}

impl std::fmt::Display for DistanceChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            DistanceChoice::Natural => "natural",
            DistanceChoice::Physical => "physical",
            DistanceChoice::Monna => "monna",
            DistanceChoice::Both => "both",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for DistanceChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Default, Args)]
pub struct LightconeArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated coupling exponents.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Occupation threshold (default 1/N^2).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub source: Option<usize>,
    #[arg(long, value_enum)]
    pub distance: Option<DistanceChoice>,
}

#[derive(Debug, Default, Args)]
pub struct QuenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated times.
    #[arg(long)]
    pub times: Option<String>,
    /// Comma-separated subsystem sizes (default 1,2,..,N/2 in powers of two).
    #[arg(long)]
    pub sizes: Option<String>,
    /// Comma-separated partition kinds: archimedean, 2adic, min_all.
    #[arg(long)]
    pub kinds: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct OtocArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated `i:j` pairs (default: site 0 with one site per graph distance).
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of output times.
    #[arg(long)]
    pub nt: Option<usize>,
    /// `log` or `linear` time grid.
    #[arg(long)]
    pub grid: Option<String>,
    /// `auto`, `exact` or `typicality`.
    #[arg(long)]
    pub method: Option<String>,
    /// Random vectors for the typicality estimate.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Short-time exponent window start.
    #[arg(long)]
    pub fit_tmin: Option<f64>,
    /// Short-time exponent window end.
    #[arg(long)]
    pub fit_tmax: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct LevelsArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Number of up spins (default N/2).
    #[arg(long)]
    pub magnons: Option<usize>,
    /// Keep reflection-parity sectors merged.
    #[arg(long)]
    pub no_reflection: bool,
    /// Keep spin-flip sectors merged.
    #[arg(long)]
    pub no_flip: bool,
}

#[derive(Debug, Default, Args)]
pub struct SemiclassicalArgs {
    /// Comma-separated system sizes.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Trajectories per size.
    #[arg(long)]
    pub traj: Option<usize>,
    /// Rotation angle of the perturbed spin.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Spacing of recorded times.
    #[arg(long)]
    pub record: Option<f64>,
    /// Curve defining lambda and t*: `site_average` or `farthest`.
    #[arg(long)]
    pub target: Option<String>,
    /// Bootstrap resamples for error bars.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct ExpdesignArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Single-atom cooperativity.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Atoms per site.
    #[arg(long)]
    pub atoms: Option<f64>,
    /// Modulation index (default: optimal).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Samples per waveform period.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Minimum intensity of the exact waveform.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Coupling exponent for the waveform.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    #[value(name = "figS2")]
    FigS2,
    #[value(name = "figS3")]
    FigS3,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Override the recipe's system size (comma-separated for fig4).
    #[arg(long)]
    pub n: Option<String>,
    /// Override the trajectory count (fig4).
    #[arg(long)]
    pub traj: Option<usize>,
}

fn execution(threads: Option<usize>) -> CliResult<Execution> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(t) => {
            treescramble::exec::configure_threads(t).map_err(CliError::Runtime)?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let exec = execution(cli.global.threads)?;
    let file = load_config(cli.global.config.as_deref())?;
    let mut sink = Sink::new(&cli.global.out)?;
    let seed = cli.global.seed;
    match cli.command {
        Command::Graph(a) => commands::graph(a, file, &mut sink)?,
        Command::Magnon(a) => commands::magnon(a, file, &mut sink, exec)?,
        Command::Lightcone(a) => commands::lightcone(a, file, &mut sink, exec)?,
        Command::QuenchEe(a) => commands::quench(a, file, &mut sink, exec)?,
        Command::OtocEd(a) => commands::otoc(a, seed, file, &mut sink, exec)?,
        Command::Levels(a) => commands::levels(a, file, &mut sink, exec)?,
        Command::Semiclassical(a) => commands::semiclassical(a, seed, file, &mut sink, exec)?,
        Command::Expdesign(a) => commands::expdesign(a, file, &mut sink)?,
        Command::Reproduce(a) => recipes::reproduce(a, seed, &mut sink, exec)?,
    }
    Ok(sink.written)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
