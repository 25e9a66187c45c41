use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdcsim::cli::{fit_layout, read_config, run, write_profile, Overrides, SimulationConfig, DEFAULT_CONFIG};
use pdcsim::detector::{compare_spectra, cut, read_image, CutAxis};
use pdcsim::interaction::ProcessKind;
use pdcsim::mcint::mixture::fit_sinc_sq_mixture;
use pdcsim::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "pdcsim",
    version,
    about = "Simulate spectrally and angularly resolved parametric scattering images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render detector images for the configured processes.
    Simulate(RunArgs),
    /// Fit the free element positions to the configured imaging targets.
    OptimizeLayout(RunArgs),
    /// Extract a horizontal or vertical profile from a counts CSV.
    Cut {
        input: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Angle in degrees (horizontal) or wavelength in nm (vertical).
        #[arg(long)]
        at: f64,
        #[arg(long)]
        stderr: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Compare a simulated image against a measured one on a common grid.
    Compare {
        simulated: PathBuf,
        measured: PathBuf,
        #[arg(long)]
        simulated_stderr: Option<PathBuf>,
        #[arg(long)]
        measured_stderr: Option<PathBuf>,
        #[arg(long)]
        allow_hash_mismatch: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Refit the sinc² proposal mixture and print it as TOML.
    FitMixture {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the bundled default configuration.
    PrintConfig,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per pixel.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Highest odd QPM order.
    #[arg(long)]
    orders: Option<i32>,
    #[arg(long, value_enum, value_delimiter = ',')]
    processes: Option<Vec<ProcessArg>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessArg {
    Down,
    Up,
}

impl RunArgs {
    fn config(&self) -> Result<SimulationConfig> {
        let mut cfg = match &self.config {
            Some(p) => read_config(p)?,
            None => SimulationConfig::bundled_default(),
        };
        Overrides {
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            samples: self.samples,
            threads: self.threads,
            max_order: self.orders,
            processes: self.processes.as_ref().map(|v| {
                v.iter()
                    .map(|p| match p {
                        ProcessArg::Down => ProcessKind::DownConversion,
                        ProcessArg::Up => ProcessKind::UpConversion,
                    })
                    .collect()
            }),
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| SimError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.config()?;
            let summary = run(&cfg)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
        }
        Command::OptimizeLayout(args) => {
            let cfg = args.config()?;
            let (fitted, report) = fit_layout(&cfg)?;
            print!("{report}");
            let dir = &cfg.output_dir;
            std::fs::create_dir_all(dir).map_err(|e| SimError::Io {
                path: dir.display().to_string(),
                source: e,
            })?;
            let p = dir.join("fitted_config.toml");
            write_or_print(Some(&p), &fitted.canonical()?)?;
            println!("{}", p.display());
        }
        Command::Cut {
            input,
            axis,
            at,
            stderr,
            output,
        } => {
            let image = read_image(&input, stderr.as_deref())?;
            let (axis, coordinate) = match axis {
                AxisArg::Horizontal => (CutAxis::Horizontal, at.to_radians()),
                AxisArg::Vertical => (CutAxis::Vertical, at * 1e-9),
            };
            let profile = cut(&image, axis, coordinate)?;
            write_profile(&output, &profile, &image.metadata.config_hash)?;
        }
        Command::Compare {
            simulated,
            measured,
            simulated_stderr,
            measured_stderr,
            allow_hash_mismatch,
            output,
        } => {
            let sim = read_image(&simulated, simulated_stderr.as_deref())?;
            let meas = read_image(&measured, measured_stderr.as_deref())?;
            let metrics = compare_spectra(&sim, &meas, allow_hash_mismatch)?;
            let text = toml::to_string(&metrics).map_err(|e| SimError::Format(e.to_string()))?;
            write_or_print(output.as_deref(), &text)?;
        }
        Command::FitMixture { output } => {
            let art = fit_sinc_sq_mixture()?;
            write_or_print(output.as_deref(), &art.to_toml()?)?;
        }
        Command::PrintConfig => print!("{DEFAULT_CONFIG}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(pdcsim::cli::exit_code(&e) as u8)
        }
    }
}
