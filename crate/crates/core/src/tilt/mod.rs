//! Transparency-information documents: model, parsing and validation,
//! canonical form and content hash, completeness checking and diffs.

mod canonical;
pub mod codes;
mod completeness;
mod diff;
mod document;
mod validate;

pub use canonical::{canonical_json, canonicalize, content_hash, to_value, to_json_with_hash};
pub use completeness::{check_completeness, CheckCode, CheckItem, CheckStatus, CompletenessReport};
pub use diff::{apply_diff, diff, same_content, DiffEntry, DiffError, DiffOp, DocumentDiff};
pub use document::*;
pub use validate::{
    from_value, parse, validate, validation_errors, warnings, ParseError, ValidationError, Warning,
};

/// RFC 3339 timestamps, always written in UTC with a `Z` suffix.
pub(crate) mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(|e| serde::de::Error::custom(format!("invalid RFC 3339 timestamp: {e}")))
    }

    pub fn format(t: &DateTime<Utc>) -> String {
        t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }
}
