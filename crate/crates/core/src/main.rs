use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qlprob::scenario::{self, Profile, RunOptions};

#[derive(Parser)]
#[command(
    name = "qlprob",
    version,
    about = "Run contextual-probability scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario file.
    Run {
        scenario: PathBuf,
        /// Directory for relative output paths (default: the scenario's directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scaling constant h.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_enum, default_value_t = Profile::Default)]
        tolerance_profile: Profile,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out_dir,
            seed,
            h,
            tolerance_profile,
        } => {
            let options = RunOptions {
                out_dir,
                seed,
                h,
                profile: tolerance_profile,
            };
            match scenario::run(&scenario, &options) {
                Ok(summary) => {
                    for path in summary.csv.iter().chain(&summary.report) {
                        println!("wrote {}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(failure) => {
                    eprintln!("qlprob: {failure}");
                    ExitCode::from(failure.exit_code())
                }
            }
        }
    }
}
