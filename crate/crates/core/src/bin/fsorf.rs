use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsorf::cli::{self, parse_config, CliError, Command, RunOptions};

/// Performance analysis of a buffer-aided hybrid FSO/RF network with a
/// shared RF backup link.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV destination; overrides `output.path`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Simulation seed; overrides `simulation.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Outage probabilities and SNR budget of the configured channel.
    Channel,
    /// Per-node metrics at the configured operating point.
    Solve,
    /// Per-node metrics over the `[sweep]` values.
    Sweep,
    /// Persistence probability maximizing total throughput.
    OptimizeP,
    /// Joint Monte-Carlo simulation next to the analytical metrics.
    Simulate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Channel => Command::Channel,
            Cmd::Solve => Command::Solve,
            Cmd::Sweep => Command::Sweep,
            Cmd::OptimizeP => Command::OptimizeP,
            Cmd::Simulate => Command::Simulate,
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Io("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    let opts = RunOptions { seed: args.seed };

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = args.threads {
            if n == 0 {
                return Err(CliError::Io("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Io(e.to_string()))?
    };
    let table = pool.install(|| cli::run(args.command.into(), &cfg, &opts))?;
    let csv = table.to_csv()?;

    match args.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(out) => cli::write_atomically(out, &csv),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
