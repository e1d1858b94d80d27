use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use confel_cli::commands::{self, EXIT_INPUT, EXIT_OK};
use confel_cli::{Options, ProblemConfig};

#[derive(Parser)]
#[command(
    name = "confel",
    version,
    about = "Structures, Euler-Lagrange derivation and simulation on generalized-quaternionic charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structure relations, metric compatibility and Kähler forms.
    Verify(Args),
    /// Derive the Euler-Lagrange system and cross-check it.
    Derive(Args),
    /// Integrate the system and write a trajectory CSV.
    Simulate(Args),
}

#[derive(clap::Args)]
struct Args {
    config: PathBuf,
    /// Write outputs into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Energy drift tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Largest accepted condition estimate of the velocity system.
    #[arg(long = "cond-bound", default_value_t = 1e12)]
    cond_bound: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Derive(a) => ("derive", a),
        Command::Simulate(a) => ("simulate", a),
    };
    let code = run(name, args);
    ExitCode::from(code as u8)
}

fn run(name: &str, args: &Args) -> i32 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return EXIT_INPUT;
        }
    };
    let cfg = match ProblemConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_INPUT;
        }
    };
    let opts = Options {
        tol: args.tol,
        cond_bound: args.cond_bound,
    };
    let outcome = match name {
        "verify" => commands::verify(&cfg),
        "derive" => commands::derive(&cfg),
        _ => commands::simulate(&cfg, &opts),
    };
    if outcome.code != EXIT_OK && outcome.code != commands::EXIT_VERIFY_FAILED {
        eprint!("{}", outcome.report);
        return outcome.code;
    }
    match &args.out {
        Some(dir) => {
            let written = fs::create_dir_all(dir)
                .and_then(|_| fs::write(dir.join(format!("{name}.txt")), &outcome.report))
                .and_then(|_| match &outcome.csv {
                    Some(csv) => fs::write(dir.join("trajectory.csv"), csv),
                    None => Ok(()),
                });
            if let Err(e) = written {
                eprintln!("error: cannot write to {}: {e}", dir.display());
                return EXIT_INPUT;
            }
        }
        None => match &outcome.csv {
            Some(csv) => {
                print!("{csv}");
                eprint!("{}", outcome.report);
            }
            None => print!("{}", outcome.report),
        },
    }
    outcome.code
}
