// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use povmqm_cli::commands::{self, Command, Experiment};
use povmqm_cli::config::{ConfigMap, OutputFormat, RunConfig, KEYS};
use povmqm_cli::{exit_code, CliError, EXIT_FAILED_CRITERIA, EXIT_OK, OUT_ENV};

/// Kernel-deformed position densities, deformed dynamics and minimal-length
/// bounds.
///
/// Exit codes: 0 success, 1 reproduce finished with failing criteria,
/// 2 validation error, 3 numerical guard (norm drift, eigensolver
/// convergence), 4 i/o error.
#[derive(Debug, Parser)]
#[command(name = "povmqm", version, after_help = config_help())]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", env = OUT_ENV, default_value = "povmqm-out")]
    out: PathBuf,

    /// Which result files to write.
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Override a config key, e.g. `--override kernel.l0=0.1` (repeatable).
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Auriga,
    Hydrogen,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate a kernel: Gram positivity, l0 analytic and by finite differences.
    KernelCheck,
    /// Position density and probability current of the configured state.
    Density,
    /// Modified uncertainty relation for the configured state.
    Uncertainty,
    /// Lowest eigenvalues of the deformed Hamiltonian.
    Spectrum,
    /// Split-step time evolution with trajectory observables.
    Evolve,
    /// First-order hydrogen S-level corrections.
    Hydrogen,
    /// Experimental upper bounds on l0.
    Bounds {
        #[arg(long, value_enum, default_value_t = ExperimentArg::Auriga)]
        experiment: ExperimentArg,
    },
    /// Run every acceptance check and write a pass/fail summary.
    Reproduce,
}

fn config_help() -> String {
    let mut s = String::from("Config keys:\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<32} {d}\n"));
    }
    s
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    for o in &cli.overrides {
        map.apply_override(o)?;
    }
    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
        Format::Both => OutputFormat::Both,
    };
    let cfg = RunConfig::from_map(&map, cli.out.clone(), format)?;
    let command = match cli.command {
        Cmd::KernelCheck => Command::KernelCheck,
        Cmd::Density => Command::Density,
        Cmd::Uncertainty => Command::Uncertainty,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Evolve => Command::Evolve,
        Cmd::Hydrogen => Command::Hydrogen,
        Cmd::Bounds { experiment: ExperimentArg::Auriga } => Command::Bounds(Experiment::Auriga),
        Cmd::Bounds { experiment: ExperimentArg::Hydrogen } => Command::Bounds(Experiment::Hydrogen),
        Cmd::Reproduce => Command::Reproduce,
    };
    let result = commands::execute(command, &cfg)?;
    let written = result.outputs.write_to(&cfg.out_dir)?;
    if let Some(log) = &result.log {
        std::fs::write(cfg.out_dir.join("reproduce.log"), log)?;
    }
    let mut stdout = std::io::stdout().lock();
    for line in &result.lines {
        // a closed pipe (e.g. `| head`) is not an error
        if let Err(e) = writeln!(stdout, "{line}") {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                break;
            }
            return Err(e.into());
        }
    }
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(if result.all_passed { EXIT_OK } else { EXIT_FAILED_CRITERIA })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("povmqm: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
