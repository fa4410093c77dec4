use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shapeprior::landmark::DEFAULT_LANDMARKS;
use shapeprior::raster::DEFAULT_MIN_AREA;
use shapeprior::synth::{BaseShape, SynthParams, DEFAULT_AMPLITUDES};
use shapeprior_cli::{EvalArgs, OutputFormat, ReconstructArgs, ScoreArgs, TrainArgs};

/// Train and apply statistical shape priors for binary masks.
#[derive(Parser)]
#[command(name = "shapeprior", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Ellipse,
    Superellipse,
    Bean,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Png,
    Pgm,
}

#[derive(Subcommand)]
enum Command {
    /// Train a shape model from a directory of masks.
    Train {
        #[arg(long)]
        masks: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Landmarks per shape.
        #[arg(long, default_value_t = DEFAULT_LANDMARKS, value_parser = clap::value_parser!(usize))]
        n: usize,
        /// Deformation modes to keep.
        #[arg(long, default_value_t = shapeprior::asm::DEFAULT_MODES)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
        min_area: usize,
        /// Also write the extracted landmarks as CSV.
        #[arg(long)]
        landmarks_out: Option<PathBuf>,
    },
    /// Shape-prior loss of a mask, or of every mask in a directory.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
        min_area: usize,
        /// Clamp each coefficient to ±c·sqrt(eigenvalue).
        #[arg(long)]
        clamp_sigmas: Option<f64>,
    },
    /// Dice, precision and recall of predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate synthetic masks.
    Synth {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated per-mode amplitudes.
        #[arg(long, value_delimiter = ',')]
        amplitudes: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "ellipse")]
        base: Base,
        #[arg(long, value_enum, default_value = "png")]
        format: Format,
    },
    /// Fit one mask and render an overlay of boundary, landmarks and reconstruction.
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
        min_area: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    let mut err = io::stderr();
    match cli.command {
        Command::Train { masks, out: model_out, n, k, min_area, landmarks_out } => {
            shapeprior_cli::train(
                &TrainArgs { masks, out: model_out, n, k, min_area, landmarks_out },
                &mut out,
                &mut err,
            )?;
        }
        Command::Score { model, input, min_area, clamp_sigmas } => {
            shapeprior_cli::score(&ScoreArgs { model, input, min_area, clamp_sigmas }, &mut out)?;
        }
        Command::Eval { pred, gt, out: report } => {
            shapeprior_cli::eval(&EvalArgs { pred, gt, out: report }, &mut out, &mut err)?;
        }
        Command::Synth { count, size, seed, out: dir, amplitudes, base, format } => {
            let params = SynthParams {
                count,
                image_size: size,
                seed,
                base: match base {
                    Base::Ellipse => BaseShape::Ellipse,
                    Base::Superellipse => BaseShape::Superellipse,
                    Base::Bean => BaseShape::Bean,
                },
                mode_amplitudes: amplitudes.unwrap_or_else(|| DEFAULT_AMPLITUDES.to_vec()),
            };
            let format = match format {
                Format::Png => OutputFormat::Png,
                Format::Pgm => OutputFormat::Pgm,
            };
            shapeprior_cli::synth(&params, &dir, format, &mut out)?;
        }
        Command::Reconstruct { model, mask, out: image, min_area } => {
            shapeprior_cli::reconstruct(&ReconstructArgs { model, mask, out: image, min_area }, &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
