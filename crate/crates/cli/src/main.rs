//! `apwt` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 a numerical
//! check failed, 4 file could not be read or written.

mod commands;
mod failure;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "apwt", version, about = "Affine Poincaré wavelet analysis of boundary wave fields")]
struct Cli {
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, env = "APWT_THREADS")]
    threads: Option<usize>,

    /// Overrides the seed of an experiment configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON configuration for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesise the boundary field of groups of moving point sources.
    GenSources {
        /// Output APWF/1 field file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sector wavelet coefficients on a (φ, a) lattice and every shift b.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// Output APWF/1 coefficient file.
        #[arg(long)]
        out: PathBuf,
        /// Refuse coefficient arrays larger than this many bytes.
        #[arg(long, default_value_t = 2 << 30)]
        max_bytes: u64,
    },
    /// Scale-rapidity diagram, heatmap and dominant peaks.
    Diagram(DiagramArgs),
    /// Field at height y rebuilt from stored coefficients.
    Reconstruct {
        /// APWF/1 coefficient file written by `transform`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        #[arg(long)]
        out: PathBuf,
        /// Boundary field to compare against after sector masking and propagation to y.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Continue a boundary field into y > 0, per sector and summed.
    Propagate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated heights.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        y: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the verification suite and emit a JSON report.
    Selfcheck {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Scale the admissibility constant by g² (negative control).
        #[arg(long, hide = true)]
        tamper_normalization: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct DiagramArgs {
    #[arg(long)]
    input: PathBuf,
    /// Receives diagram.csv, diagram.pgm, peaks.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Wave speed used to convert scale to frequency.
    #[arg(long, default_value_t = apwt::DEFAULT_WAVE_SPEED)]
    c: f64,
    /// Use the nominal ω = cκ/a instead of the single-source calibration.
    #[arg(long)]
    no_calibrate: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(format!("thread pool: {e}")))?;
    }
    let ctx = commands::Context { seed: cli.seed, config: cli.config };
    match cli.command {
        Command::GenSources { out } => commands::gen_sources(&ctx, &out),
        Command::Transform { input, out, max_bytes } => commands::transform(&ctx, &input, &out, max_bytes),
        Command::Diagram(a) => commands::diagram(&ctx, &a.input, &a.out_dir, a.c, !a.no_calibrate),
        Command::Reconstruct { input, y, out, reference } => {
            commands::reconstruct(&ctx, &input, y, &out, reference.as_deref())
        }
        Command::Propagate { input, y, out_dir } => commands::propagate(&ctx, &input, &y, &out_dir),
        Command::Selfcheck { level, report, tamper_normalization } => {
            let level = match level {
                LevelArg::Quick => apwt_verify::Level::Quick,
                LevelArg::Full => apwt_verify::Level::Full,
            };
            commands::selfcheck(&ctx, level, report.as_deref(), tamper_normalization)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
