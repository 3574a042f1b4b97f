use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shape_diffusion::mesh::Point3;
use shape_diffusion::spectra::SpectrumSpec;
use shape_diffusion_cli::{
    decompose, info, simulate, spectrum_check, CliError, DecomposeSource, FrameFormat, Overrides, RunConfig,
};

const THREADS_VAR: &str = "SHAPE_DIFFUSION_THREADS";

#[derive(Parser)]
#[command(name = "shape-diffusion", version, about = "Stochastic shape processes in a spherical harmonic basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation config and write frames, manifest.json and stats.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FrameFormat>,
    },
    /// Harmonic coefficients of the unit sphere or of a mesh.
    Decompose {
        /// Function preset; only `sphere` is available.
        #[arg(long, conflicts_with = "mesh")]
        preset: Option<String>,
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Projection center `x,y,z` for meshes (default: vertex centroid).
        #[arg(long, value_parser = parse_point, requires = "mesh")]
        center: Option<Point3>,
        #[arg(long, allow_negative_numbers = true)]
        band_limit: i64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace and Sobolev convergence diagnostics for a covariance spectrum.
    SpectrumCheck {
        /// Read the spectrum (and band limit) from a run config.
        #[arg(long, conflicts_with = "spectrum")]
        config: Option<PathBuf>,
        /// identity | inv_linear | inv_quadratic | bessel
        #[arg(long)]
        spectrum: Option<String>,
        /// Order of a bessel spectrum.
        #[arg(long)]
        spectrum_nu: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        band_limit: Option<i64>,
        /// Sobolev order to test.
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long)]
        json: bool,
    },
    /// Summarise a mesh or a coefficient document.
    Info { path: PathBuf },
}

fn parse_point(text: &str) -> Result<Point3, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected three comma-separated numbers".to_string())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config, seed, out, format } => {
            let summary = simulate(&config, &Overrides { seed, out, format })?;
            println!("wrote {} frames to {}", summary.frames.len(), summary.out_dir.display());
        }
        Command::Decompose {
            preset,
            mesh,
            center,
            band_limit,
            out,
        } => {
            let source = match (preset.as_deref(), mesh) {
                (_, Some(path)) => DecomposeSource::Mesh { path, center },
                (Some("sphere") | None, None) => DecomposeSource::Sphere,
                (Some(other), None) => return Err(CliError::Config(format!("unknown preset {other:?}"))),
            };
            let doc = decompose(&source, band_limit)?;
            let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))? + "\n";
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        Command::SpectrumCheck {
            config,
            spectrum,
            spectrum_nu,
            band_limit,
            nu,
            json,
        } => {
            let (spec, band_limit) = match config {
                Some(path) => {
                    let cfg = RunConfig::load(&path)?;
                    let n = band_limit.or(cfg.band_limit.map(|n| n as i64));
                    (cfg.spectrum, n)
                }
                None => {
                    let kind = spectrum.ok_or_else(|| CliError::Config("pass --spectrum or --config".into()))?;
                    let spec = SpectrumSpec {
                        kind,
                        nu: spectrum_nu,
                        band_limit: None,
                        lambdas: None,
                    };
                    (spec, band_limit)
                }
            };
            let report = spectrum_check(&spec, band_limit, nu)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?
                );
            } else {
                println!("{report}");
            }
        }
        Command::Info { path } => {
            let value = info(&path)?;
            println!("{}", serde_json::to_string_pretty(&value).map_err(|e| CliError::Numeric(e.to_string()))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
