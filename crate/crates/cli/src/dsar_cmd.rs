use std::fmt::Write;
use std::path::PathBuf;

use clap::Subcommand;
use serde_json::json;
use transparency_core::dsar::{
    execute, parse_registry, registry_lookup, validate_descriptor, DsarSession, ExecuteOptions, Identity, MockDriver, MockFixture, SessionStatus,
    VirtualClock,
};

use crate::output::{emit, read, write, Failure, EXECUTION, INVALID, OK};

#[derive(Debug, Subcommand)]
pub enum DsarCommand {
    /// Check a descriptor file
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Execute a descriptor; the session is written to OUT/session.json
    Run {
        file: PathBuf,
        /// Site driver; only mock:<fixture.json> is built in
        #[arg(long)]
        driver: String,
        /// JSON object with EMAIL and FULL_NAME
        #[arg(long)]
        identity: PathBuf,
        /// Directory for downloads and the session file
        #[arg(long)]
        out: PathBuf,
        /// Continue a session saved by an earlier run
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Seconds this run may wait before pausing with status "waiting"
        #[arg(long)]
        max_wait: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Registry entry for a domain
    Lookup {
        domain: String,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn parse_identity(text: &str) -> Result<Identity, Failure> {
    // the message names the position only, never the values
    serde_json::from_str(text)
        .map_err(|e| Failure::invalid(format!("IdentityError at line {}, column {}: expected an object with EMAIL and FULL_NAME", e.line(), e.column())))
}

fn mock_driver(spec: &str) -> Result<MockDriver, Failure> {
    let path = spec.strip_prefix("mock:").ok_or_else(|| Failure::usage(format!("unsupported driver {spec:?}; use mock:<fixture.json>")))?;
    let fixture = MockFixture::parse(&read(path.as_ref())?).map_err(|e| Failure::invalid(format!("{path}: {e}")))?;
    Ok(MockDriver::new(fixture))
}

fn describe(s: &DsarSession) -> String {
    let mut out = String::new();
    let total = s.descriptor.steps.len();
    match (&s.status, &s.failure) {
        (SessionStatus::Failed, Some(f)) => {
            let kind = s.descriptor.steps.get(f.step_index).map_or("?", |step| step.kind());
            writeln!(out, "{}: failed at step {} ({kind}): {}", s.descriptor.service, f.step_index, f.reason).unwrap();
        }
        (status, _) => writeln!(out, "{}: {} after {}/{total} steps", s.descriptor.service, json!(status).as_str().unwrap_or(""), s.step_index).unwrap(),
    }
    for a in &s.artifacts {
        writeln!(out, "  {} ({} bytes) {}", a.name, a.byte_length, a.local_path.display()).unwrap();
    }
    out
}

pub fn run(command: DsarCommand) -> Result<u8, Failure> {
    match command {
        DsarCommand::Validate { file, json } => {
            let d = validate_descriptor(&read(&file)?).map_err(|e| Failure::invalid(format!("{}: {e}", file.display())))?;
            let summary = json!({
                "service": d.service,
                "domain": d.domain,
                "steps": d.steps.iter().map(|s| s.kind()).collect::<Vec<_>>(),
                "hash": d.content_hash(),
            });
            emit(json, &summary, |_| format!("valid: {} ({} steps) {}\n", d.service, d.steps.len(), d.content_hash()));
            Ok(OK)
        }
        DsarCommand::Run { file, driver, identity, out, resume, max_wait, json } => {
            let descriptor = validate_descriptor(&read(&file)?).map_err(|e| Failure::invalid(format!("{}: {e}", file.display())))?;
            let mut driver = mock_driver(&driver)?;
            let identity = parse_identity(&read(&identity)?)?;
            let resume = match resume {
                Some(p) => Some(
                    serde_json::from_str::<DsarSession>(&read(&p)?)
                        .map_err(|e| Failure::invalid(format!("SyntaxError in {} at line {}, column {}", p.display(), e.line(), e.column())))?,
                ),
                None => None,
            };
            let options = ExecuteOptions { artifact_dir: out.clone(), wait_budget: max_wait };
            // the mock site runs on simulated time
            let session = execute(&descriptor, &mut driver, &identity, &mut VirtualClock::default(), &options, resume).map_err(Failure::invalid)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::io(&out, e))?;
            let text = serde_json::to_string_pretty(&session).expect("session serializes");
            write(&out.join("session.json"), &text)?;
            emit(json, &session, describe);
            Ok(if session.status == SessionStatus::Failed { EXECUTION } else { OK })
        }
        DsarCommand::Lookup { domain, registry, json } => {
            let records = parse_registry(&read(&registry)?).map_err(|e| Failure::invalid(format!("{}: {e}", registry.display())))?;
            let record = registry_lookup(&records, &domain).ok_or_else(|| Failure::new(INVALID, format!("NotFoundError: no registry entry for {domain}")))?;
            emit(json, record, |r| {
                let notes = if r.notes.is_empty() { String::new() } else { format!("\n  {}", r.notes) };
                format!("{} ({}): {}\n  difficulty {}{notes}\n", r.service, r.domain, r.request_url, json!(r.difficulty).as_str().unwrap_or(""))
            });
            Ok(OK)
        }
    }
}
