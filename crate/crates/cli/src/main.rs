use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loewner_cli::{catalogue, run, RunOptions};

#[derive(Parser)]
#[command(name = "loewner", version, about = "Run Loewner-Kufarev flow experiments")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the analyses one at a time on a single thread.
        #[arg(long)]
        sequential: bool,
    },
    /// List the built-in driving-term families.
    Catalogue,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match cli.command {
        Command::Catalogue => {
            print!("{}", catalogue::list_catalogue());
            ExitCode::SUCCESS
        }
        Command::Run { config, out, sequential } => match run(&RunOptions { config, out, sequential }) {
            Ok(summary) => {
                for (name, status) in &summary.statuses {
                    println!("{name}: {status:?}");
                }
                println!("{} artifacts in {}", summary.artifacts.len() + 1, summary.out_dir.display());
                ExitCode::from(summary.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
