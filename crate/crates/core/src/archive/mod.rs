//! Local analysis of personal-data export archives.
//!
//! [`ingest`] walks an unpacked export and counts records per file,
//! [`profile`] aggregates counts and timestamps, and [`risk_factor`]
//! condenses a profile into one number in `[0, 100]`:
//!
//! ```text
//! risk = clamp(round(Σ weight(kind) · log2(1 + count(kind))), 0, 100)
//! weights: messages 6, posts 5, activity 4, profile 3, other 2
//! ```
//!
//! Nothing here touches the network, and nothing derived from record
//! contents other than counts and timestamps leaves this module.

mod adapters;
mod ingest;
mod profile;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::ingest;
pub use profile::profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Posts,
    Messages,
    Profile,
    Activity,
    Other,
}

impl RecordKind {
    pub const ALL: [RecordKind; 5] = [RecordKind::Posts, RecordKind::Messages, RecordKind::Profile, RecordKind::Activity, RecordKind::Other];

    pub fn weight(self) -> f64 {
        match self {
            RecordKind::Messages => 6.0,
            RecordKind::Posts => 5.0,
            RecordKind::Activity => 4.0,
            RecordKind::Profile => 3.0,
            RecordKind::Other => 2.0,
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Posts => "posts",
            RecordKind::Messages => "messages",
            RecordKind::Profile => "profile",
            RecordKind::Activity => "activity",
            RecordKind::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchiveError {
    #[error("IoError at {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("EmptyArchiveError: no files below {0}")]
    EmptyArchive(PathBuf),
    #[error("ManifestMismatchError: {path} now holds {found} records, manifest says {expected}")]
    ManifestMismatch { path: String, expected: u64, found: u64 },
}

impl ArchiveError {
    pub fn name(&self) -> &'static str {
        match self {
            ArchiveError::Io { .. } => "IoError",
            ArchiveError::EmptyArchive(_) => "EmptyArchiveError",
            ArchiveError::ManifestMismatch { .. } => "ManifestMismatchError",
        }
    }

    fn io(path: impl Into<PathBuf>, e: impl fmt::Display) -> Self {
        ArchiveError::Io { path: path.into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestFile {
    /// Slash-separated, relative to the archive root.
    pub relative_path: String,
    pub kind: RecordKind,
    pub record_count: u64,
}

/// A file that could not be read as records. The message never quotes
/// file contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestWarning {
    pub relative_path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArchiveManifest {
    pub service: String,
    pub root: PathBuf,
    pub files: Vec<ManifestFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<IngestWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArchiveProfile {
    pub service: String,
    pub counts_by_kind: BTreeMap<RecordKind, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub earliest: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latest: Option<DateTime<Utc>>,
    /// Timestamped records per `YYYY-MM`.
    pub monthly_histogram: BTreeMap<String, u64>,
    pub total_bytes: u64,
}

impl ArchiveProfile {
    pub fn empty(service: impl Into<String>) -> Self {
        Self {
            service: service.into(),
            counts_by_kind: RecordKind::ALL.iter().map(|&k| (k, 0)).collect(),
            earliest: None,
            latest: None,
            monthly_histogram: BTreeMap::new(),
            total_bytes: 0,
        }
    }

    pub fn count(&self, kind: RecordKind) -> u64 {
        self.counts_by_kind.get(&kind).copied().unwrap_or(0)
    }
}

/// Anonymized entry for comparing the scope of exports across people.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScoreboardEntry {
    pub service: String,
    pub risk_factor: u8,
}

pub fn risk_factor(profile: &ArchiveProfile) -> u8 {
    let sum: f64 = RecordKind::ALL
        .iter()
        .map(|&k| k.weight() * (1.0 + profile.count(k) as f64).log2())
        .sum();
    sum.round().clamp(0.0, 100.0) as u8
}

pub fn scoreboard_entry(profile: &ArchiveProfile) -> ScoreboardEntry {
    ScoreboardEntry { service: profile.service.clone(), risk_factor: risk_factor(profile) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_counts(counts: &[(RecordKind, u64)]) -> ArchiveProfile {
        let mut p = ArchiveProfile::empty("svc");
        for &(k, n) in counts {
            p.counts_by_kind.insert(k, n);
        }
        p
    }

    #[test]
    fn empty_profile_has_no_risk() {
        assert_eq!(risk_factor(&ArchiveProfile::empty("x")), 0);
    }

    #[test]
    fn single_message() {
        // 6 · log2(2) = 6
        assert_eq!(risk_factor(&with_counts(&[(RecordKind::Messages, 1)])), 6);
    }

    #[test]
    fn mixed_counts_by_hand() {
        // 6·log2(8) + 5·log2(4) + 2·log2(2) = 18 + 10 + 2
        let p = with_counts(&[(RecordKind::Messages, 7), (RecordKind::Posts, 3), (RecordKind::Other, 1)]);
        assert_eq!(risk_factor(&p), 30);
        // 3·log2(3) = 4.754… → 5
        assert_eq!(risk_factor(&with_counts(&[(RecordKind::Profile, 2)])), 5);
    }

    #[test]
    fn clamped_at_one_hundred() {
        let p = with_counts(&RecordKind::ALL.map(|k| (k, u64::MAX / 2)));
        assert_eq!(risk_factor(&p), 100);
    }

    #[test]
    fn scoreboard_carries_only_service_and_risk() {
        let e = scoreboard_entry(&with_counts(&[(RecordKind::Messages, 1)]));
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"service":"svc","riskFactor":6}"#);
    }
}
