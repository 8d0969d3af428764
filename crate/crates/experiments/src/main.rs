use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heavytail_experiments::{run, Config, Verb};

#[derive(Parser)]
#[command(name = "heavytail", version, about = "Heavy-tail fitting and firm-panel experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set fit.gates.pooled=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    verb: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write a synthetic firm panel.
    Synth,
    /// Clean, link and derive panel variables.
    Derive,
    /// Fit both models per subsample and write the fit table.
    Fit,
    /// Model comparison scores per subsample.
    Gof,
    /// Stable fits to normalized sums of i.i.d. draws.
    Gclt,
    /// Sample variance against sample size.
    Vardiv,
    /// Empirical and fitted densities on a grid.
    ExportDensity,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Verb {
        match c {
            Command::Synth => Verb::Synth,
            Command::Derive => Verb::Derive,
            Command::Fit => Verb::Fit,
            Command::Gof => Verb::Gof,
            Command::Gclt => Verb::Gclt,
            Command::Vardiv => Verb::Vardiv,
            Command::ExportDensity => Verb::ExportDensity,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(dir) = &cli.output_dir {
        overrides.push(format!("output_dir={:?}", dir.display().to_string()));
    }
    let result = Config::load_with_overrides(cli.config.as_deref(), &overrides).and_then(|cfg| run(cli.verb.into(), &cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
