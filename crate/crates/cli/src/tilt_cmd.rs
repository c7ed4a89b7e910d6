use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde::Serialize;
use serde_json::Value;
use transparency_core::tilt::{self, CheckStatus, ParseError, TiltDocument, Warning};

use crate::output::{emit, read, Failure, INVALID, OK};

#[derive(Debug, Subcommand)]
pub enum TiltCommand {
    /// Parse and validate a document; lists every validation error
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Disclosure checklist; exits 1 when an item is missing
    Completeness {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Changes from OLD to NEW as slash-separated paths
    Diff {
        old: PathBuf,
        new: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Content hash of the canonical form, ignoring any stored hash
    Hash {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

pub fn load(path: &Path) -> Result<TiltDocument, Failure> {
    tilt::parse(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Validity {
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    version: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hash: Option<String>,
    errors: Vec<Problem>,
    warnings: Vec<Warning>,
}

#[derive(Serialize)]
struct Problem {
    error: &'static str,
    path: String,
    message: String,
}

fn validity(text: &str) -> Validity {
    let invalid = |errors| Validity { valid: false, id: None, version: None, hash: None, errors, warnings: Vec::new() };
    match tilt::parse(text) {
        Ok(doc) => Validity {
            valid: true,
            warnings: tilt::warnings(&doc),
            id: Some(doc.meta.id),
            version: Some(doc.meta.version),
            hash: Some(doc.meta.hash),
            errors: Vec::new(),
        },
        Err(ParseError::Validation(first)) => {
            // report every rule the document breaks, not just the first
            let all = serde_json::from_str::<TiltDocument>(text).map(|d| tilt::validation_errors(&d)).unwrap_or_default();
            let errs = if all.is_empty() { vec![first] } else { all };
            invalid(errs.into_iter().map(|e| Problem { error: "ValidationError", path: e.path, message: e.message }).collect())
        }
        Err(e) => invalid(vec![Problem { error: e.name(), path: String::new(), message: e.to_string() }]),
    }
}

pub fn run(command: TiltCommand) -> Result<u8, Failure> {
    match command {
        TiltCommand::Validate { file, json } => {
            let v = validity(&read(&file)?);
            if !v.valid {
                for p in &v.errors {
                    match p.path.as_str() {
                        "" => eprintln!("{}", p.message),
                        path => eprintln!("{} at {path}: {}", p.error, p.message),
                    }
                }
            }
            emit(json, &v, |v| {
                let mut out = String::new();
                if let (Some(id), Some(version), Some(hash)) = (&v.id, v.version, &v.hash) {
                    writeln!(out, "valid: {id} v{version} {hash}").unwrap();
                }
                for w in &v.warnings {
                    writeln!(out, "warning at {}: {}", w.path, w.message).unwrap();
                }
                out
            });
            Ok(if v.valid { OK } else { INVALID })
        }
        TiltCommand::Completeness { file, json } => {
            let report = tilt::check_completeness(&load(&file)?);
            emit(json, &report, |r| {
                let mut out = String::new();
                for item in &r.items {
                    let status = match item.status {
                        CheckStatus::Present => "present",
                        CheckStatus::Missing => "MISSING",
                        CheckStatus::NotApplicable => "n/a",
                    };
                    writeln!(out, "{:?}  {status:<8} {}", item.key, item.key.description()).unwrap();
                }
                writeln!(out, "{} missing", r.missing_count()).unwrap();
                out
            });
            Ok(if report.missing_count() == 0 { OK } else { INVALID })
        }
        TiltCommand::Diff { old, new, json } => {
            let delta = tilt::diff(&load(&old)?, &load(&new)?);
            emit(json, &delta, |d| {
                let mut out = String::new();
                for e in &d.entries {
                    let show = |v: &Option<Value>| v.as_ref().map(Value::to_string).unwrap_or_default();
                    match e.op {
                        tilt::DiffOp::Added => writeln!(out, "+ {} {}", e.path, show(&e.after)),
                        tilt::DiffOp::Removed => writeln!(out, "- {} {}", e.path, show(&e.before)),
                        tilt::DiffOp::Changed => writeln!(out, "~ {} {} -> {}", e.path, show(&e.before), show(&e.after)),
                    }
                    .unwrap();
                }
                out
            });
            Ok(OK)
        }
        TiltCommand::Hash { file, json } => {
            let mut value: Value = serde_json::from_str(&read(&file)?)
                .map_err(|e| Failure::invalid(format!("SyntaxError at line {}, column {}: {e}", e.line(), e.column())))?;
            if let Some(meta) = value.get_mut("meta").and_then(Value::as_object_mut) {
                meta.insert("hash".into(), Value::String(String::new()));
            }
            let doc = tilt::from_value(value).map_err(|e| Failure::invalid(format!("{}: {e}", file.display())))?;
            let hash = tilt::content_hash(&doc);
            emit(json, &serde_json::json!({ "id": doc.meta.id, "hash": hash }), |_| format!("{hash}\n"));
            Ok(OK)
        }
    }
}
