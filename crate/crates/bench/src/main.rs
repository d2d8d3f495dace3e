use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use speckle_bench::{BenchConfig, BenchError, Preset, RunPaths};

#[derive(Parser)]
#[command(
    name = "speckle-bench",
    version,
    about = "Speckle denoising benchmark harness"
)]
struct Cli {
    /// Configuration file with `key = value` lines, applied over the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed; overrides the preset and the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Baseline settings: desk, paper or paper-literal.
    #[arg(long, global = true, default_value = "desk")]
    preset: String,
    /// Output directory; overrides the preset and the configuration file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or scan the corpus and write the split manifest.
    Prepare,
    /// Train the skip and no-skip autoencoders.
    Train,
    /// Evaluate every method and write the report bundle.
    Bench,
    /// Write a comparison strip for one image.
    Panel {
        /// Manifest image id (file stem); defaults to the first test image.
        #[arg(long)]
        image: Option<String>,
        /// Speckle variance; defaults to the configured panel variance.
        #[arg(long)]
        variance: Option<f64>,
    },
    /// Extract SSIM-versus-variance series from a results CSV.
    Curves {
        /// Results CSV; defaults to the one in the output directory.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Destination; defaults to curves.tsv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<BenchConfig, BenchError> {
    let mut cfg = BenchConfig::preset(cli.preset.parse::<Preset>()?);
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.finalize()
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let cfg = load_config(&cli)?;
    let paths = RunPaths::new(&cfg.out_dir);
    match cli.command {
        Command::Prepare => {
            let manifest = speckle_bench::prepare(&cfg)?;
            println!("wrote {}", manifest.display());
        }
        Command::Train => {
            for ckpt in speckle_bench::train(&cfg)? {
                println!("wrote {}", ckpt.display());
            }
        }
        Command::Bench => {
            let b = speckle_bench::bench(&cfg)?;
            for p in [b.results, b.markdown, b.curves, b.panel] {
                println!("wrote {}", p.display());
            }
        }
        Command::Panel { image, variance } => {
            let id = match image.or(cfg.panel_image.clone()) {
                Some(id) => id,
                None => {
                    let manifest = speckle_core::imaging::DatasetManifest::read(&paths.manifest())?;
                    let test = manifest.split(speckle_core::imaging::Split::Test);
                    test.first().map(|e| e.id()).ok_or_else(|| {
                        BenchError::Data("manifest has an empty test split".into())
                    })?
                }
            };
            let out = speckle_bench::panel(&cfg, &id, variance.unwrap_or(cfg.panel_variance))?;
            println!("wrote {}", out.display());
        }
        Command::Curves { results, output } => {
            let results = results.unwrap_or_else(|| paths.results());
            let output = output.unwrap_or_else(|| paths.curves());
            println!(
                "wrote {}",
                speckle_bench::curves(&results, &output)?.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
