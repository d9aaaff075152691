use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zalm_cli::output::write_atomic;
use zalm_cli::{commands, load_config, CliError};

/// Design calculator and simulator for spectrally multiplexed heralded
/// time-bin sources.
#[derive(Parser)]
#[command(name = "zalm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Named parameter set, applied before --config.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output file; companion files are written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override `sim.workers`.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Set a single key, e.g. `--set design.rf_power=2W`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the effective configuration (or write it to --out) and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Derived design point for the configured drive.
    Design,
    /// One-variable sweep written as CSV.
    Sweep,
    /// Joint spectrum and Schmidt purity.
    Jsa,
    /// Analytic heralded rates and modulator comparison.
    Rates,
    /// Monte Carlo run checked against the analytic rate.
    Sim,
    /// Spectral shearing of a time-bin pulse pair.
    Shear,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut overrides = cli.set.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("sim.seed={seed}"));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("sim.workers={w}"));
    }
    let config = load_config(cli.preset.as_deref(), cli.config.as_deref(), &overrides)?;
    let out = cli.out.as_deref();

    if cli.dump_config {
        let text = config.dump();
        match out {
            Some(path) => write_atomic(path, text.as_bytes()).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?,
            None => print!("{text}"),
        }
        return Ok(());
    }

    let outcome = match cli.command {
        Command::Design => commands::design(&config, out),
        Command::Sweep => commands::sweep(&config, out),
        Command::Jsa => commands::jsa(&config, out),
        Command::Rates => commands::rates(&config, out),
        Command::Sim => commands::sim(&config, out),
        Command::Shear => commands::shear_cmd(&config, out),
    }?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for a in &outcome.artifacts {
        write_atomic(&a.path, &a.contents).map_err(|source| CliError::Io {
            path: a.path.display().to_string(),
            source,
        })?;
    }
    print!("{}", outcome.stdout);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
