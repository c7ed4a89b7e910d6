use serde_json::Value;
use thiserror::Error;

use super::codes::{is_country_code, is_iso8601_duration, is_language_code, NormativeBasis};
use super::{content_hash, ContactPoint, StorageKind, TiltDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ValidationError at {path}: {message}")]
pub struct ValidationError {
    /// Slash-separated field path, e.g. `controller/country`.
    pub path: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("SyntaxError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl ParseError {
    pub fn name(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::Validation(_) => "ValidationError",
        }
    }
}

/// Non-fatal findings that do not make a document invalid.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Warning {
    pub path: String,
    pub message: String,
}

/// Parses and validates document text.
///
/// A non-empty `meta.hash` must match the content hash; an empty one is
/// filled in, so every returned document carries its own hash.
pub fn parse(text: &str) -> Result<TiltDocument, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(from_value(value)?)
}

/// Validates an already-parsed JSON tree.
pub fn from_value(value: Value) -> Result<TiltDocument, ValidationError> {
    let mut doc: TiltDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = slash_path(e.path());
        ValidationError::new(path, strip_position(&e.into_inner().to_string()))
    })?;
    validate(&doc)?;
    let hash = content_hash(&doc);
    if doc.meta.hash.is_empty() {
        doc.meta.hash = hash;
    } else if doc.meta.hash != hash {
        return Err(ValidationError::new("meta/hash", "hash does not match document content"));
    }
    Ok(doc)
}

/// First invariant violation, in document order.
pub fn validate(doc: &TiltDocument) -> Result<(), ValidationError> {
    match validation_errors(doc).into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn validation_errors(doc: &TiltDocument) -> Vec<ValidationError> {
    let mut errs = Vec::new();
    let mut fail = |path: String, msg: &str| errs.push(ValidationError::new(path, msg));

    let meta = &doc.meta;
    if meta.id.trim().is_empty() {
        fail("meta/id".into(), "id must not be empty");
    }
    if meta.version < 1 {
        fail("meta/version".into(), "version must be at least 1");
    }
    if meta.modified < meta.created {
        fail("meta/modified".into(), "modified must not precede created");
    }
    if !is_language_code(&meta.language) {
        fail("meta/language".into(), "not an ISO 639-1 language code");
    }
    if !meta.hash.is_empty()
        && !(meta.hash.len() == 64 && meta.hash.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)))
    {
        fail("meta/hash".into(), "hash must be 64 lowercase hex digits or empty");
    }

    if !is_country_code(&doc.controller.country) {
        fail("controller/country".into(), "not an ISO 3166-1 alpha-2 code");
    }
    let mut contact = |path: &str, cp: &Option<ContactPoint>| {
        if cp.as_ref().is_some_and(|c| !c.has_contact()) {
            fail(path.into(), "contact point needs an email or a phone number");
        }
    };
    contact("controller/representative", &doc.controller.representative);
    contact("dpo", &doc.dpo);
    contact("rights/complaintAuthority", &doc.rights.complaint_authority);

    for (i, d) in doc.data_disclosed.iter().enumerate() {
        if d.category.trim().is_empty() {
            errs.push(ValidationError::new(format!("dataDisclosed/{i}/category"), "category must not be empty"));
        }
        for (j, r) in d.recipients.iter().enumerate() {
            if !is_country_code(&r.country) {
                errs.push(ValidationError::new(
                    format!("dataDisclosed/{i}/recipients/{j}/country"),
                    "not an ISO 3166-1 alpha-2 code",
                ));
            }
        }
        if let Some(s) = &d.storage {
            if s.kind == StorageKind::Duration && !is_iso8601_duration(&s.value) {
                errs.push(ValidationError::new(
                    format!("dataDisclosed/{i}/storage/value"),
                    "not an ISO 8601 duration",
                ));
            }
        }
    }
    for (i, t) in doc.third_country_transfers.iter().enumerate() {
        if !is_country_code(&t.country) {
            errs.push(ValidationError::new(
                format!("thirdCountryTransfers/{i}/country"),
                "not an ISO 3166-1 alpha-2 code",
            ));
        }
    }
    errs
}

/// Legal bases that do not follow the `GDPR-<art>-<para>-<lit>` pattern.
pub fn warnings(doc: &TiltDocument) -> Vec<Warning> {
    doc.purposes()
        .filter(|(_, _, p)| NormativeBasis::parse(&p.legal_basis).is_none())
        .map(|(i, j, p)| Warning {
            path: format!("dataDisclosed/{i}/purposes/{j}/legalBasis"),
            message: format!("non-normative legal basis {:?}", p.legal_basis),
        })
        .collect()
}

fn slash_path(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let parts: Vec<String> = path
        .iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(index.to_string()),
            Segment::Map { key } => Some(key.clone()),
            Segment::Enum { variant } => Some(variant.clone()),
            Segment::Unknown => None,
        })
        .collect();
    if parts.is_empty() {
        "/".to_string()
    } else {
        parts.join("/")
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
