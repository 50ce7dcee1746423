use std::path::PathBuf;
use std::process::ExitCode;

use bemodel::app::{self, RunOptions, EXIT_CONFIG};
use bemodel::scenario::SEED_ENV;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bemodel", version, about = "Comparison checks and diffusion experiments on weighted model manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or built-in scenario.
    Run {
        /// Path to an INI file, or the name of a built-in scenario.
        config: String,
        /// Output directory (default: the scenario's `out`, else bemodel-out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the simulations.
        #[arg(long)]
        workers: Option<usize>,
        /// Override a field, e.g. `--set simulation.n_paths=500`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in scenarios.
    List,
    /// Print the radial geometry of a scenario's model.
    Describe {
        config: String,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return code(if usage { EXIT_CONFIG } else { 0 });
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            overrides,
        } => code(app::run(
            &config,
            &RunOptions {
                out,
                workers,
                overrides,
                env_seed,
            },
        )),
        Command::List => {
            print!("{}", app::list());
            code(0)
        }
        Command::Describe { config, overrides } => {
            let result = app::load(&config, &overrides, env_seed.as_deref())
                .map_err(anyhow::Error::from)
                .and_then(|s| app::describe(&s));
            match result {
                Ok(text) => {
                    print!("{text}");
                    code(0)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    code(EXIT_CONFIG)
                }
            }
        }
    }
}
