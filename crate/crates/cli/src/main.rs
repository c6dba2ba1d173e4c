//! `dispersive-kit`: synthetic data, analysis pipelines and band prediction.

mod analyze;
mod band;
mod manifest;
mod output;
mod report;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "dispersive-kit", version, about = "Characterization toolkit for dispersively read-out transmon devices")]
struct Cli {
    /// Worker threads for Monte-Carlo and bootstrap stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Master seed; overrides DISPERSIVE_KIT_SEED and any `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic traces, RB datasets or IQ shots from a JSON config.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an analysis pipeline and write report JSON plus CSV plot data.
    Analyze {
        kind: AnalysisKind,
        /// Input file or directory (traces for coherence, dataset or α table for RB kinds).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Pipeline config (required for crosstalk).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Gaussian window width as a fraction of the record length.
        #[arg(long, default_value_t = dispersive_kit::freq::DEFAULT_SIGMA_RATIO)]
        sigma_ratio: f64,
        /// Bootstrap resamples over sequence seeds (corr-rb); 0 disables.
        #[arg(long, default_value_t = dispersive_kit::rb::DEFAULT_RESAMPLES)]
        resamples: usize,
    },
    /// Predict plasma-band quantities for a pillar lattice.
    PredictBand {
        /// LatticeSpec JSON; the default lattice when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Emit an n×n-site pairwise coupling map.
        #[arg(long)]
        grid: Option<usize>,
        /// Site spacing of the map (mm); defaults to the lattice pitch.
        #[arg(long)]
        spacing: Option<f64>,
    },
    /// Render markdown tables from analysis outputs and device parameters.
    Report {
        /// Directory of analysis JSON outputs.
        #[arg(long)]
        input: Option<PathBuf>,
        /// DeviceParams JSON for the device tables.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AnalysisKind {
    Coherence,
    Crosstalk,
    Rb,
    CorrRb,
    LeakageRb,
}

impl AnalysisKind {
    fn name(self) -> &'static str {
        match self {
            Self::Coherence => "coherence",
            Self::Crosstalk => "crosstalk",
            Self::Rb => "rb",
            Self::CorrRb => "corr-rb",
            Self::LeakageRb => "leakage-rb",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        anyhow::ensure!(jobs > 0, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Synth { config, out } => synth::run(&config, &out, cli.seed),
        Command::Analyze { kind, input, config, out, sigma_ratio, resamples } => analyze::run(
            kind,
            &analyze::Options { input, config, out, sigma_ratio, resamples, seed: cli.seed },
        ),
        Command::PredictBand { config, out, grid, spacing } => band::run(config.as_deref(), &out, grid, spacing),
        Command::Report { input, config, out } => report::run(input.as_deref(), config.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
