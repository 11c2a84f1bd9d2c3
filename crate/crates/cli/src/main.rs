mod commands;
mod config;
mod dataset;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CommandError;
use config::{Format, RunConfig};
use dataset::Dataset;

#[derive(Parser)]
#[command(name = "qengine", version, about = "Transient currents, noise and entanglement of a two-qubit thermal machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Populations, currents, coherence and concurrence against time.
    Evolve(RunArgs),
    /// Finite-time zero-frequency noise of both bath currents.
    Noise(RunArgs),
    /// Uncertainty ratios and their violation windows.
    Kur(RunArgs),
    /// Steady-state quantities over the sweep values.
    Sweep(RunArgs),
    /// Points where the current witnesses entanglement that is absent.
    Witness(RunArgs),
    /// Numerical invariant checks.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding outputs.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding outputs.format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<CommandError> for Failure {
    fn from(e: CommandError) -> Self {
        match e {
            CommandError::Config(c) => Failure::Config(c.to_string()),
            CommandError::Numerical(m) => Failure::Numerical(m),
        }
    }
}

fn write_all(sets: &[Dataset], config: &RunConfig) -> Result<(), Failure> {
    for d in sets {
        let path = d
            .write(&config.outputs.directory, config.outputs.format)
            .map_err(|e| Failure::Io(format!("writing {}: {e}", config.outputs.directory.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    let (args, name) = match &command {
        Command::Evolve(a) => (a, "evolve"),
        Command::Noise(a) => (a, "noise"),
        Command::Kur(a) => (a, "kur"),
        Command::Sweep(a) => (a, "sweep"),
        Command::Witness(a) => (a, "witness"),
        Command::Validate(a) => (a, "validate"),
    };
    let mut config = RunConfig::load(&args.config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(dir) = &args.out {
        config.outputs.directory = dir.clone();
    }
    if let Some(f) = args.format {
        config.outputs.format = f;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Io(format!("thread pool: {e}")))?;

    pool.install(|| {
        if name == "validate" {
            let (sets, checks) = commands::validate(&config)?;
            write_all(&sets, &config)?;
            for c in &checks {
                println!("{}: {} ({})", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
            }
            if let Some(bad) = checks.iter().find(|c| !c.passed) {
                return Err(Failure::Numerical(format!("invariant {} violated: {}", bad.name, bad.detail)));
            }
            return Ok(());
        }
        let sets = match name {
            "evolve" => commands::evolve(&config),
            "noise" => commands::noise(&config),
            "kur" => commands::kur(&config),
            "sweep" => commands::sweep(&config),
            _ => commands::witness(&config),
        }?;
        write_all(&sets, &config)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("io error: {m}");
            ExitCode::from(1)
        }
    }
}
