//! `opstable`: price, validate and tabulate operator-stable models from a
//! JSON configuration.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 bad input or
//! configuration, 3 numerical failure.

mod commands;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use opstable::{MarketModel, ModelConfig};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "opstable", version, about = "European options under operator-stable Lévy fluctuations")]
struct Cli {
    /// Model configuration (JSON).
    #[arg(short, long, global = true, env = "OPSTABLE_CONFIG")]
    config: Option<PathBuf>,

    /// Print the normalized configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    Price(commands::PriceArgs),
    Validate(validate::ValidateArgs),
    Moments(commands::MomentsArgs),
    Coeffs(commands::CoeffsArgs),
    Density(commands::DensityArgs),
    Mc(commands::McArgs),
}

pub struct Loaded {
    pub config: ModelConfig,
    pub model: MarketModel,
}

fn load(path: Option<&PathBuf>) -> anyhow::Result<Loaded> {
    let path = path.ok_or_else(|| anyhow!("no model configuration: pass --config or set OPSTABLE_CONFIG"))?;
    let config = ModelConfig::load(path)?;
    let model = config
        .to_model()
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(Loaded { config, model })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let loaded = load(cli.config.as_ref())?;
    if cli.dump_config {
        let cfg = ModelConfig::from_model(&loaded.model, loaded.config.quadrature);
        println!("{}", cfg.to_json());
        return Ok(0);
    }
    let mut out = std::io::stdout().lock();
    match cli.command {
        None => Err(anyhow!("no subcommand given; see --help")),
        Some(Command::Price(a)) => commands::price(&loaded, &a, &mut out),
        Some(Command::Validate(a)) => validate::run(&loaded, &a, &mut out),
        Some(Command::Moments(a)) => commands::moments(&loaded, &a, &mut out),
        Some(Command::Coeffs(a)) => commands::coeffs(&loaded, &a, &mut out),
        Some(Command::Density(a)) => commands::density(&loaded, &a, &mut out),
        Some(Command::Mc(a)) => commands::mc(&loaded, &a, &mut out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<opstable::Error>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
