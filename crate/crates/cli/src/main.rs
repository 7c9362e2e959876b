use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use resonance_lab::constants::{fine_structure, CODATA_2018};
use resonance_lab_cli::config::{parse_config, ConfigError, ScenarioConfig};
use resonance_lab_cli::run::{output_dir, run_scenario, RunError};
use resonance_lab_cli::{exit, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "resonance-lab",
    version,
    about = "Quantum oscillator, perturbation and photon kinematics scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        config: PathBuf,
        /// Output directory, overriding the `[output] path` of the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Print the physical constants in use as JSON.
    Constants,
}

fn load(path: &Path) -> Result<ScenarioConfig, i32> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Err(exit::VALIDATION);
        }
    };
    parse_config(&text).map_err(|e| {
        report_config_error(path, &e);
        exit::VALIDATION
    })
}

fn report_config_error(path: &Path, err: &ConfigError) {
    for issue in err.issues() {
        eprintln!("{}: {issue}", path.display());
    }
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            )),
        },
    }
}

fn run(config: &Path, out: Option<PathBuf>) -> i32 {
    let cfg = match load(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("{msg}");
            return exit::VALIDATION;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            return exit::NUMERIC;
        }
    };
    let dir = out.unwrap_or_else(|| output_dir(&cfg, config));
    match pool.install(|| run_scenario(&cfg, &dir, Some(config))) {
        Ok(outcome) => {
            println!("{}", outcome.dir.display());
            exit::OK
        }
        Err(err) => {
            println!("{}", err.to_json(Some(cfg.kind)));
            if let RunError::Numeric(e) = &err {
                log::error!("{e}");
            }
            exit::NUMERIC
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({} scenario)", config.display(), cfg.kind.name());
                exit::OK
            }
            Err(code) => code,
        },
        Command::Constants => {
            let c = CODATA_2018;
            let doc = json!({
                "constants": c,
                "fine_structure": fine_structure(&c),
                "electron_rest_energy_erg": c.electron_rest_energy(),
                "planck_h": c.planck(),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("constants serialize")
            );
            exit::OK
        }
    };
    ExitCode::from(code as u8)
}
