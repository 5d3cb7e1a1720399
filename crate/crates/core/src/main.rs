use clap::{Parser, Subcommand};
use nvsim::scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nvsim",
    version,
    about = "NV-center simulation scenarios: fine structure, branch reduction, spin-light coupling, lambda-system dynamics, ultrafast spin control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario config and print the run manifest as JSON.
    Run {
        /// Path to a TOML scenario config.
        config: PathBuf,
    },
    /// List available scenarios and their config keys.
    List,
    /// Print the pinned physical constants table.
    Constants,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match scenario::run(&config) {
            Ok(manifest) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&manifest)
                        .expect("manifest serialization cannot fail")
                );
                ExitCode::SUCCESS
            }
            Err(err) => {
                eprintln!("nvsim: {err}");
                ExitCode::from(err.exit_code() as u8)
            }
        },
        Command::List => {
            print!("{}", scenario::list_text());
            ExitCode::SUCCESS
        }
        Command::Constants => {
            print!("{}", scenario::constants_text());
            ExitCode::SUCCESS
        }
    }
}
