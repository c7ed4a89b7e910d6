//! `transparency`: one binary over documents, the hub, scoring, access
//! requests and data-export archives.
//!
//! Exit codes: 0 success, 1 validation or completeness failure, 2 I/O
//! error, 3 access-request failure, 64 usage error.

mod archive_cmd;
mod dsar_cmd;
mod hub_cmd;
mod output;
mod score_cmd;
mod tilt_cmd;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use output::{Failure, USAGE};

#[derive(Debug, Parser)]
#[command(name = "transparency", version, about = "Transparency documents, privacy labels, access requests and archive analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, check, diff and hash transparency documents
    #[command(subcommand)]
    Tilt(tilt_cmd::TiltCommand),
    /// Run or use the document hub
    #[command(subcommand)]
    Hub(hub_cmd::HubCommand),
    /// Privacy score and summary card for a document
    Score(score_cmd::ScoreArgs),
    /// Machine-readable access requests
    #[command(subcommand)]
    Dsar(dsar_cmd::DsarCommand),
    /// Analyze a downloaded data-export archive
    #[command(subcommand)]
    Archive(archive_cmd::ArchiveCommand),
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Tilt(c) => tilt_cmd::run(c),
        Command::Hub(c) => hub_cmd::run(c),
        Command::Score(a) => score_cmd::run(a),
        Command::Dsar(c) => dsar_cmd::run(c),
        Command::Archive(c) => archive_cmd::run(c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
