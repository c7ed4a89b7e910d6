use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::AnnotationError;
use crate::tilt::CheckCode;

/// One question of the annotation queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldKey {
    ControllerIdentity,
    ControllerRepresentative,
    DpoContact,
    DataCategories,
    DataPurposes,
    DataLegalBasis,
    DataLegitimateInterest,
    DataRecipients,
    DataStorage,
    DataRequirementNote,
    Transfers,
    RightsCore,
    RightsWithdrawConsent,
    RightsComplaintAuthority,
    Adm,
}

impl FieldKey {
    /// Queue order: controller block, per-category block, transfers, rights, ADM.
    pub const ALL: [FieldKey; 15] = [
        FieldKey::ControllerIdentity,
        FieldKey::ControllerRepresentative,
        FieldKey::DpoContact,
        FieldKey::DataCategories,
        FieldKey::DataPurposes,
        FieldKey::DataLegalBasis,
        FieldKey::DataLegitimateInterest,
        FieldKey::DataRecipients,
        FieldKey::DataStorage,
        FieldKey::DataRequirementNote,
        FieldKey::Transfers,
        FieldKey::RightsCore,
        FieldKey::RightsWithdrawConsent,
        FieldKey::RightsComplaintAuthority,
        FieldKey::Adm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldKey::ControllerIdentity => "controller.identity",
            FieldKey::ControllerRepresentative => "controller.representative",
            FieldKey::DpoContact => "dpo.contact",
            FieldKey::DataCategories => "data.categories",
            FieldKey::DataPurposes => "data.purposes",
            FieldKey::DataLegalBasis => "data.legalBasis",
            FieldKey::DataLegitimateInterest => "data.legitimateInterest",
            FieldKey::DataRecipients => "data.recipients",
            FieldKey::DataStorage => "data.storage",
            FieldKey::DataRequirementNote => "data.requirementNote",
            FieldKey::Transfers => "transfers",
            FieldKey::RightsCore => "rights.core",
            FieldKey::RightsWithdrawConsent => "rights.withdrawConsent",
            FieldKey::RightsComplaintAuthority => "rights.complaintAuthority",
            FieldKey::Adm => "adm",
        }
    }
}

impl fmt::Display for FieldKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldKey {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AnnotationError::UnknownField(s.to_string()))
    }
}

impl Serialize for FieldKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for FieldKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct FieldSpec {
    pub key: FieldKey,
    pub aspect: String,
    pub checks: Vec<CheckCode>,
    pub prompt: String,
    pub keywords: Vec<String>,
}

#[derive(Deserialize)]
struct FieldTable {
    fields: Vec<FieldSpec>,
}

static FIELDS: Lazy<BTreeMap<FieldKey, FieldSpec>> = Lazy::new(|| {
    let table: FieldTable =
        serde_json::from_str(include_str!("../../data/annotation_fields.json")).expect("bundled annotation_fields.json is valid");
    table.fields.into_iter().map(|f| (f.key, f)).collect()
});

pub fn field_spec(key: FieldKey) -> &'static FieldSpec {
    &FIELDS[&key]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn data_table_covers_every_key() {
        assert_eq!(FIELDS.len(), FieldKey::ALL.len());
        for k in FieldKey::ALL {
            let spec = field_spec(k);
            assert!(!spec.keywords.is_empty(), "{k}");
            assert!(spec.keywords.iter().all(|w| *w == w.to_lowercase()), "{k}");
            assert_eq!(k.as_str().parse::<FieldKey>().unwrap(), k);
        }
    }

    #[test]
    fn queue_covers_the_checklist_once() {
        let checks: Vec<CheckCode> = FieldKey::ALL.iter().flat_map(|&k| field_spec(k).checks.clone()).collect();
        let unique: BTreeSet<_> = checks.iter().copied().collect();
        assert_eq!(checks.len(), unique.len());
        assert_eq!(unique.into_iter().collect::<Vec<_>>(), CheckCode::ALL.to_vec());
    }

    #[test]
    fn unknown_key() {
        assert_eq!("nope".parse::<FieldKey>(), Err(AnnotationError::UnknownField("nope".into())));
    }
}
