//! `vortexlink`: batch front end for tracing, hologram synthesis and two-photon
//! predictions.

mod commands;
mod config;
mod states;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "vortexlink",
    version,
    about = "Linked optical vortex simulator"
)]
struct Cli {
    /// RunConfig JSON; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for stochastic commands (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct StateArgs {
    /// hopf-link, p-hopf or lg:<ell>,<p>.
    #[arg(long, default_value = "hopf-link", conflicts_with = "state_file")]
    state: String,
    /// Superposition JSON document instead of a named state.
    #[arg(long)]
    state_file: Option<PathBuf>,
    /// Link orientation in radians (hopf-link only).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncodingArg {
    NormalizedBlaze,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    #[value(alias = "projective-chsh")]
    Projective,
    #[value(alias = "visibility-2sqrt2")]
    Visibility,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    /// Schmidt state from the bandwidth model.
    Bandwidth,
    /// Link subspace with the configured weights.
    Link,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace vortex lines in 3D and compute their linking numbers.
    Trace {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Synthesize a measurement hologram and check its first-order reconstruction.
    Holo {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value = "normalized-blaze")]
        encoding: EncodingArg,
        /// Carrier fringes across the aperture.
        #[arg(long, default_value_t = 32.0)]
        cycles: f64,
        /// Probe beam waist in units of the mode waist.
        #[arg(long, default_value_t = 4.0)]
        probe_waists: f64,
    },
    /// Coincidences over axial and rotational displacements of the idler analyzer.
    ContrastMap {
        /// Samples over dz in [-range, range] z_R.
        #[arg(long, default_value_t = 41)]
        dz_steps: usize,
        #[arg(long, default_value_t = 1.0)]
        dz_range: f64,
        /// Samples over dtheta in [-pi, pi].
        #[arg(long, default_value_t = 73)]
        dtheta_steps: usize,
    },
    /// Coincidence fringes between link analyzers and the CHSH parameter.
    Bell {
        #[arg(long, value_enum, default_value = "projective")]
        estimator: EstimatorArg,
        /// Idler orientations sampled over [0, pi].
        #[arg(long, default_value_t = 73)]
        idler_steps: usize,
    },
    /// Coincidence probabilities between LG modes of the two photons.
    CorrMatrix {
        #[arg(long, value_enum, default_value = "bandwidth")]
        source: SourceArg,
        #[arg(long, default_value_t = 2)]
        max_ell: u32,
        #[arg(long, default_value_t = 2)]
        max_p: u32,
    },
    /// Monte Carlo counts at the four CHSH settings.
    Counts {
        /// Integration time per setting in seconds (overrides the config).
        #[arg(long)]
        integration: Option<f64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cli.command {
        Command::Trace { state } => commands::trace(&cfg, &state),
        Command::Holo {
            state,
            encoding,
            cycles,
            probe_waists,
        } => commands::holo(&cfg, &state, encoding, cycles, probe_waists),
        Command::ContrastMap {
            dz_steps,
            dz_range,
            dtheta_steps,
        } => commands::contrast_map(&cfg, dz_steps, dz_range, dtheta_steps),
        Command::Bell {
            estimator,
            idler_steps,
        } => commands::bell(&cfg, estimator, idler_steps),
        Command::CorrMatrix {
            source,
            max_ell,
            max_p,
        } => commands::corr_matrix(&cfg, source, max_ell, max_p),
        Command::Counts { integration } => commands::counts(&cfg, integration),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("{}", Cli::command().render_usage());
            ExitCode::FAILURE
        }
    }
}
