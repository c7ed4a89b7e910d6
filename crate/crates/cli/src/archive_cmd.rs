use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde::Serialize;
use transparency_core::archive::{self, ArchiveManifest, ArchiveProfile, RecordKind};

use crate::output::{emit, json, Failure, IO, OK};

#[derive(Debug, Subcommand)]
pub enum ArchiveCommand {
    /// Per-kind counts, time range, monthly histogram and risk factor
    Analyze {
        dir: PathBuf,
        /// Service name; detected from the file layout when omitted
        #[arg(long)]
        service: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// The 0-100 risk factor alone
    Risk {
        dir: PathBuf,
        #[arg(long)]
        service: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// The shareable scoreboard entry as JSON
    Scoreboard {
        dir: PathBuf,
        #[arg(long)]
        service: Option<String>,
    },
}

fn analyze(dir: &Path, service: Option<&str>) -> Result<(ArchiveManifest, ArchiveProfile), Failure> {
    let fail = |e: archive::ArchiveError| Failure::new(IO, e);
    let manifest = archive::ingest(dir, service).map_err(fail)?;
    let profile = archive::profile(&manifest).map_err(fail)?;
    Ok((manifest, profile))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Analysis {
    profile: ArchiveProfile,
    risk_factor: u8,
    manifest: ArchiveManifest,
}

pub fn run(command: ArchiveCommand) -> Result<u8, Failure> {
    match command {
        ArchiveCommand::Analyze { dir, service, json } => {
            let (manifest, profile) = analyze(&dir, service.as_deref())?;
            let analysis = Analysis { risk_factor: archive::risk_factor(&profile), profile, manifest };
            emit(json, &analysis, |a| {
                let p = &a.profile;
                let mut out = String::new();
                writeln!(out, "{}: risk factor {}, {} bytes", p.service, a.risk_factor, p.total_bytes).unwrap();
                for kind in RecordKind::ALL {
                    writeln!(out, "  {:<9}{}", kind.to_string(), p.count(kind)).unwrap();
                }
                if let (Some(first), Some(last)) = (&p.earliest, &p.latest) {
                    writeln!(out, "  from {} to {}", first.to_rfc3339(), last.to_rfc3339()).unwrap();
                }
                for (month, n) in &p.monthly_histogram {
                    writeln!(out, "  {month} {n}").unwrap();
                }
                for w in &a.manifest.warnings {
                    writeln!(out, "  skipped {}: {}", w.relative_path, w.message).unwrap();
                }
                out
            });
            Ok(OK)
        }
        ArchiveCommand::Risk { dir, service, json } => {
            let (_, profile) = analyze(&dir, service.as_deref())?;
            let entry = archive::scoreboard_entry(&profile);
            emit(json, &entry, |e| format!("{}\n", e.risk_factor));
            Ok(OK)
        }
        ArchiveCommand::Scoreboard { dir, service } => {
            let (_, profile) = analyze(&dir, service.as_deref())?;
            json(&archive::scoreboard_entry(&profile));
            Ok(OK)
        }
    }
}
