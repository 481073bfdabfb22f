use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_ins_cli::commands::{self, SimulateOptions};
use hybrid_ins_cli::schema::ModeName;
use hybrid_ins_cli::{exit, CliError};
use rayon::prelude::*;

/// Hybrid inertial navigation observers on SE2(3).
///
/// Exit codes: 0 success, 2 malformed input, 3 divergence, 4 unsupported
/// landmark configuration. Set RUST_LOG for log output.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Continuous,
    Algorithm1,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write estimates.csv and summary.json.
    Simulate {
        /// Scenario file(s); more than one requires --batch.
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run all scenarios in parallel, each into OUT/<file stem>/.
        #[arg(long)]
        batch: bool,
    },
    /// Run the multi-rate observer over a recorded bundle directory.
    Replay {
        bundle: PathBuf,
        /// Scenario file supplying the [observer] (and optional [riccati], [run]) sections.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print landmark geometry, jump parameters and observability checks.
    Diagnose { scenario: PathBuf },
}

fn report(context: &Path, e: &CliError) -> i32 {
    eprintln!("error: {}: {e}", context.display());
    e.exit_code()
}

fn simulate_one(path: &Path, out: &Path, opts: SimulateOptions) -> i32 {
    match commands::simulate(path, opts).and_then(|o| o.write(out)) {
        Ok(()) => exit::OK,
        Err(e) => report(path, &e),
    }
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Simulate { scenarios, out, mode, seed, batch } => {
            let mode = mode.map(|m| match m {
                ModeArg::Continuous => ModeName::Continuous,
                ModeArg::Algorithm1 => ModeName::Algorithm1,
            });
            let opts = SimulateOptions { mode, seed };
            if !batch {
                if scenarios.len() != 1 {
                    eprintln!("error: several scenario files need --batch");
                    return exit::INPUT;
                }
                return simulate_one(&scenarios[0], &out, opts);
            }
            let codes: Vec<i32> = scenarios
                .par_iter()
                .map(|p| {
                    let stem = p.file_stem().map_or_else(|| "scenario".into(), |s| s.to_os_string());
                    simulate_one(p, &out.join(stem), opts)
                })
                .collect();
            codes.into_iter().find(|c| *c != exit::OK).unwrap_or(exit::OK)
        }
        Command::Replay { bundle, config, out } => {
            match commands::replay(&bundle, &config).and_then(|o| {
                for w in &o.summary.warnings {
                    eprintln!("warning: {w}");
                }
                o.write(&out)
            }) {
                Ok(()) => exit::OK,
                Err(e) => report(&bundle, &e),
            }
        }
        Command::Diagnose { scenario } => match commands::diagnose(&scenario) {
            Ok(text) => {
                print!("{text}");
                exit::OK
            }
            Err(e) => report(&scenario, &e),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { 0 });
        }
    };
    ExitCode::from(run(cli) as u8)
}
