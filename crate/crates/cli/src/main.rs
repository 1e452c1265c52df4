use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvoac_cli::{execute, Command, CommonArgs};

#[derive(Parser)]
#[command(name = "mvoac", version, about = "Over-the-air majority-vote experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Encode one vote vector; print the sequence and its PMEPR
    Gen(CommonArgs),
    /// PMEPR distribution of random encoded sequences
    Pmepr(CommonArgs),
    /// Computation error rate sweep
    Cer(CommonArgs),
    /// Empirical detector metric means against the closed form
    Lemma1(CommonArgs),
    /// Closed-loop UAV waypoint mission
    Uav(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().as_str().unwrap_or("invalid arguments");
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage reason=\"{msg}: {}\"", first.replace('"', "'"));
            return ExitCode::from(2);
        }
    };
    let (command, args) = match &cli.command {
        Sub::Gen(a) => (Command::Gen, a),
        Sub::Pmepr(a) => (Command::Pmepr, a),
        Sub::Cer(a) => (Command::Cer, a),
        Sub::Lemma1(a) => (Command::Lemma1, a),
        Sub::Uav(a) => (Command::Uav, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
