use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use transparency_core::score::{compute_score, summarize, ExternalSignals, ScoreReport, SignalsFile, SummaryCard};
use transparency_core::tilt::TiltDocument;

use crate::output::{emit, read, Failure, OK};
use crate::tilt_cmd::load;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    doc: PathBuf,
    /// JSON object of external signals keyed by domain
    #[arg(long)]
    signals: PathBuf,
    /// Signals entry to use; defaults to the host of the document's first source URL
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Scored {
    domain: Option<String>,
    signals: ExternalSignals,
    report: ScoreReport,
    summary: SummaryCard,
}

fn source_host(doc: &TiltDocument) -> Option<String> {
    doc.sources.iter().find_map(|s| reqwest::Url::parse(s).ok()?.host_str().map(str::to_string))
}

pub fn run(args: ScoreArgs) -> Result<u8, Failure> {
    let doc = load(&args.doc)?;
    let file = SignalsFile::parse(&read(&args.signals)?).map_err(|e| Failure::invalid(format!("{}: {e}", args.signals.display())))?;
    let domain = args.domain.or_else(|| source_host(&doc));
    let signals = domain.as_deref().and_then(|d| file.lookup(d)).cloned().unwrap_or_default();
    let scored = Scored { report: compute_score(&doc, &signals), summary: summarize(&doc, &signals), signals, domain };
    emit(args.json, &scored, |s| {
        let mut out = String::new();
        let r = &s.report;
        writeln!(out, "{}: {} {:?}", s.summary.controller_name, r.score, r.label).unwrap();
        for item in &r.breakdown {
            writeln!(out, "  {:<11}{:+}", item.code, item.points).unwrap();
        }
        let c = &s.summary;
        writeln!(
            out,
            "transfers {}, automated decisions {}, trackers {}, missing disclosures {}",
            c.transfer_count,
            if c.adm_in_use { "yes" } else { "no" },
            c.tracker_count,
            c.missing_disclosures
        )
        .unwrap();
        out
    });
    Ok(OK)
}
