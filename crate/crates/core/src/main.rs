use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use imdd_wiener::cli::{
    cmd_cir, cmd_design, cmd_shape, cmd_sweep, CommandError, CommandResult, ExperimentConfig,
};
use imdd_wiener::wiener::Variant;
use imdd_wiener::Error;

/// Wiener-filter equalization for dispersive IM/DD links.
#[derive(Parser, Debug)]
#[command(name = "imdd-wiener", version)]
struct Args {
    /// TOML experiment file; omitted keys take the reference-link defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `sweep.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output CSV path (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "IMDD_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled combined impulse response.
    Cir,
    /// Filter taps at one SNR point.
    Design {
        #[arg(long, default_value = "matched")]
        variant: Variant,
        /// Target electrical SNR, dB (defaults to the last grid point).
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
    },
    /// ESR-optimal constellation span over the SNR grid.
    Shape,
    /// Full Monte-Carlo sweep.
    Sweep {
        /// Restrict to these variants (repeatable; defaults to the config list).
        #[arg(long)]
        variant: Vec<Variant>,
    },
}

fn run(args: Args) -> CommandResult<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.sweep.master_seed = seed;
    }
    cfg.validate()?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()).into());
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut out: Box<dyn Write + Send> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    };

    pool.install(|| match args.command {
        Command::Cir => cmd_cir(&cfg, &mut out),
        Command::Design { variant, snr_db } => {
            let snr = snr_db.unwrap_or(*cfg.sweep.snr_grid_db.last().expect("validated non-empty"));
            cmd_design(&cfg, snr, variant, &mut out)
        }
        Command::Shape => cmd_shape(&cfg, &mut out),
        Command::Sweep { variant } => {
            let variants = if variant.is_empty() {
                cfg.sweep.variants.clone()
            } else {
                variant
            };
            cmd_sweep(&cfg, &variants, &mut out)
        }
    })?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", CommandError::line(&e));
            ExitCode::FAILURE
        }
    }
}
