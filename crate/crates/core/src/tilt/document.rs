//! Transparency-information document model.
//!
//! Field names serialize in lowerCamelCase. Optional fields are omitted
//! when absent and lists are always emitted, so the serialized shape is
//! exactly what [`crate::tilt::canonicalize`] hashes.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TiltDocument {
    pub meta: Meta,
    pub controller: Controller,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dpo: Option<ContactPoint>,
    #[serde(default)]
    pub data_disclosed: Vec<DataDisclosed>,
    #[serde(default)]
    pub third_country_transfers: Vec<ThirdCountryTransfer>,
    #[serde(default)]
    pub rights: RightsInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automated_decision_making: Option<AdmInfo>,
    /// Provenance URLs for the document as a whole.
    #[serde(default)]
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Meta {
    pub id: String,
    /// Service name.
    pub name: String,
    pub version: u64,
    #[serde(with = "crate::tilt::rfc3339")]
    pub created: DateTime<Utc>,
    #[serde(with = "crate::tilt::rfc3339")]
    pub modified: DateTime<Utc>,
    /// ISO 639-1 code.
    pub language: String,
    /// Lowercase SHA-256 hex digest of the canonical form, or empty.
    #[serde(default)]
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Controller {
    pub name: String,
    pub address: String,
    /// ISO 3166-1 alpha-2 code.
    pub country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<ContactPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ContactPoint {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
}

impl ContactPoint {
    pub fn has_contact(&self) -> bool {
        self.email.as_deref().is_some_and(|s| !s.trim().is_empty())
            || self.phone.as_deref().is_some_and(|s| !s.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DataDisclosed {
    pub category: String,
    #[serde(default)]
    pub purposes: Vec<Purpose>,
    #[serde(default)]
    pub recipients: Vec<Recipient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<Storage>,
    /// Whether provision of this data is a statutory or contractual requirement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Purpose {
    pub description: String,
    /// `GDPR-<art>-<para>-<lit>` or free text.
    pub legal_basis: String,
    /// Description of the pursued legitimate interest (needed for `GDPR-6-1-f`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legitimate_interest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Recipient {
    pub name: String,
    pub category: String,
    pub country: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageKind {
    Duration,
    Criterion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Storage {
    pub kind: StorageKind,
    /// ISO 8601 duration when `kind` is `duration`, free text otherwise.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ThirdCountryTransfer {
    pub country: String,
    pub adequacy_decision: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safeguards: Option<String>,
}

impl ThirdCountryTransfer {
    /// True when neither an adequacy decision nor safeguards cover the transfer.
    pub fn is_unprotected(&self) -> bool {
        !self.adequacy_decision && !self.safeguards.as_deref().is_some_and(|s| !s.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RightEntry {
    pub available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl RightEntry {
    pub fn new(available: bool, description: Option<String>) -> Self {
        Self { available, description }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RightsInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectification: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portability: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objection: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub withdraw_consent: Option<RightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complaint_authority: Option<ContactPoint>,
}

impl RightsInfo {
    /// The six data-subject rights (without consent withdrawal), keyed by field name.
    pub fn core_rights(&self) -> [(&'static str, Option<&RightEntry>); 6] {
        [
            ("access", self.access.as_ref()),
            ("rectification", self.rectification.as_ref()),
            ("erasure", self.erasure.as_ref()),
            ("restriction", self.restriction.as_ref()),
            ("portability", self.portability.as_ref()),
            ("objection", self.objection.as_ref()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AdmInfo {
    pub in_use: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logic_description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consequences: Option<String>,
}

impl TiltDocument {
    /// Iterates `(category index, purpose index, purpose)` over all disclosed data.
    pub fn purposes(&self) -> impl Iterator<Item = (usize, usize, &Purpose)> {
        self.data_disclosed
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.purposes.iter().enumerate().map(move |(j, p)| (i, j, p)))
    }

    /// Returns a copy whose `meta.hash` is the content hash.
    pub fn sealed(mut self) -> Self {
        self.meta.hash = super::content_hash(&self);
        self
    }
}
