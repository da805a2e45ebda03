use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ambc::harness::run_experiment;
use ambc::selfcheck::run_selfcheck;
use clap::{Parser, Subcommand};

mod config;
mod output;
mod presets;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "ambc", version, about = "Ambient backscatter ratio-detector BER simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more BER sweeps and write a CSV and metadata file per scenario.
    Run {
        /// Flat `key = value` config; applied on top of the preset if both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed, overriding config and preset.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Run the analytic and Monte Carlo consistency checks.
    Selfcheck,
    /// List the built-in presets.
    ListPresets,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] ambc::Error),
    #[error("self-check failed")]
    Check,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Sim(ambc::Error::Config(_)) => 2,
            CliError::Sim(_) | CliError::Check => 1,
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_runs(config: Option<&Path>, preset: Option<&str>, seed: Option<u64>) -> Result<Vec<RunConfig>, CliError> {
    let mut runs = match preset {
        Some(name) => presets::find(name)
            .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`; see `ambc list-presets`")))?
            .runs(),
        None if config.is_none() => return Err(CliError::Usage("run needs --config or --preset".into())),
        None => vec![RunConfig::default()],
    };
    if let Some(path) = config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: format!("cannot read config: {e}"),
        })?;
        let overrides = Overrides::parse(&text).map_err(|msg| CliError::Config {
            path: path.to_path_buf(),
            msg,
        })?;
        for run in &mut runs {
            overrides.apply(run).map_err(|msg| CliError::Config {
                path: path.to_path_buf(),
                msg,
            })?;
        }
    }
    if let Some(seed) = seed {
        for run in &mut runs {
            run.system.seed = seed;
        }
    }
    Ok(runs)
}

fn cmd_run(config: Option<&Path>, seed: Option<u64>, out: &Path, preset: Option<&str>) -> Result<(), CliError> {
    let runs = load_runs(config, preset, seed)?;
    // Validate everything before the first simulation starts.
    for run in &runs {
        for spec in run.specs() {
            spec.validate()?;
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    for run in &runs {
        for (spec, &scenario) in run.specs().iter().zip(&run.scenarios) {
            let curve = run_experiment(spec)?;
            let stem = output::file_stem(run, scenario);
            let csv = out.join(format!("{stem}.csv"));
            let meta = out.join(format!("{stem}.meta"));
            let f = fs::File::create(&csv).map_err(io_err(&csv))?;
            output::write_csv(BufWriter::new(f), &curve).map_err(io_err(&csv))?;
            let f = fs::File::create(&meta).map_err(io_err(&meta))?;
            output::write_meta(BufWriter::new(f), run, scenario, preset).map_err(io_err(&meta))?;
            if !curve.monotonicity_flags().is_empty() {
                eprintln!("note: {stem}: BER rises with SNR at grid points {:?}", curve.monotonicity_flags());
            }
            eprintln!("wrote {}", csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            preset,
        } => cmd_run(config.as_deref(), seed, &out, preset.as_deref()),
        Command::Selfcheck => {
            let report = run_selfcheck();
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Check)
            }
        }
        Command::ListPresets => {
            for p in presets::PRESETS {
                println!("{:<10} {}", p.name, p.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
