use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xplab::inequality::Registry;
use xplab_cli::{list, run, RunArgs};

#[derive(Parser)]
#[command(name = "xplab", version, about = "Desk-scale experiments on metric X_p inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set params.m=4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (defaults to the config, then $XPLAB_OUT_DIR, then ./xplab-out).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Lift every resource cap.
        #[arg(long)]
        force_caps: bool,
    },
    /// List experiment kinds and their parameters.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", list(&Registry::standard()));
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            set,
            out,
            seed,
            workers,
            force_caps,
        } => {
            let args = RunArgs {
                config,
                overrides: set,
                out,
                seed,
                workers,
                force_caps,
            };
            match run(&args) {
                Ok(w) => {
                    println!("{}", w.json.display());
                    if let Some(csv) = w.csv {
                        println!("{}", csv.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("xplab: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
