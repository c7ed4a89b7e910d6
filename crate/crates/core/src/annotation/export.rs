//! Maps a finished annotation task onto a transparency document.
//!
//! Every mapping falls back to something valid: an excerpt that cannot be
//! interpreted is dropped instead of producing an invalid field, so the
//! exported document always passes validation.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{AnnotationError, AnnotationTask, FieldKey};
use crate::tilt::codes::{is_country_code, is_eu_eea, is_iso8601_duration, is_language_code};
use crate::tilt::{
    from_value, to_value, AdmInfo, ContactPoint, Controller, DataDisclosed, Meta, Purpose, Recipient, RightEntry,
    RightsInfo, Storage, StorageKind, ThirdCountryTransfer, TiltDocument, ValidationError,
};

/// Document metadata that the policy text itself does not provide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExportSeed {
    pub id: String,
    pub name: String,
    pub language: String,
    /// Used when no country can be read from an excerpt.
    pub country: String,
    /// Creation time when the task holds no annotation timestamps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl ExportSeed {
    fn check(&self) -> Result<(), ValidationError> {
        if self.id.trim().is_empty() {
            return Err(ValidationError::new("meta/id", "must not be empty"));
        }
        if !is_language_code(&self.language) {
            return Err(ValidationError::new("meta/language", format!("{:?} is not an ISO 639-1 code", self.language)));
        }
        if !is_country_code(&self.country) {
            return Err(ValidationError::new("controller/country", format!("{:?} is not an ISO 3166-1 alpha-2 code", self.country)));
        }
        Ok(())
    }
}

static COUNTRY_NAMES: Lazy<Vec<(String, String)>> = Lazy::new(|| {
    let map: BTreeMap<String, String> =
        serde_json::from_str(include_str!("../../data/country_names.json")).expect("bundled country_names.json is valid");
    let mut names: Vec<_> = map.into_iter().collect();
    // longer names first so "vereinigtes königreich" wins over shorter overlaps
    names.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then(a.0.cmp(&b.0)));
    names
});

static EMAIL: Lazy<Regex> = Lazy::new(|| Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}").unwrap());
static PHONE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\+?\d[\d /()-]{5,}\d").unwrap());
static ARTICLE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)art(?:\.|ikel|icle)?\s*(\d+)\s*(?:abs(?:\.|atz)?|para(?:\.|graph)?|\()\s*(\d+)\)?\s*(?:(?:s(?:atz|\.)\s*\d+\s*)?(?:lit(?:\.|era)?|buchst(?:\.|abe)?|point|\()\s*([a-f])\b)")
        .unwrap()
});
static LEAD_IN: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)^.*?\b(?:ist|sind|is|are|lautet|contact|kontakt)\b\s*:?\s*|^[^:]{0,40}:\s*").unwrap()
});

fn country_in(text: &str) -> Option<String> {
    let lower = text.to_lowercase();
    let mut best: Option<(usize, String)> = None;
    for (name, code) in COUNTRY_NAMES.iter() {
        let mut from = 0;
        while let Some(pos) = lower[from..].find(name.as_str()) {
            let at = from + pos;
            let end = at + name.len();
            let before_ok = lower[..at].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
            let after_ok = lower[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
            if before_ok && after_ok {
                if best.as_ref().is_none_or(|(p, _)| at < *p) {
                    best = Some((at, code.clone()));
                }
                break;
            }
            from = at + name.len().max(1);
        }
    }
    // a segment that is exactly an alpha-2 code, e.g. "Musterstr. 1, 10115 Berlin, DE"
    for segment in text.split([',', '\n', ';']) {
        let s = segment.trim().trim_end_matches('.');
        if s.len() == 2 && s.chars().all(|c| c.is_ascii_uppercase()) && is_country_code(s) {
            let at = text.find(segment).unwrap_or(usize::MAX);
            if best.as_ref().is_none_or(|(p, _)| at < *p) {
                best = Some((at, s.to_string()));
            }
        }
    }
    best.map(|(_, code)| code)
}

fn clean(s: &str) -> String {
    s.trim().trim_end_matches(['.', ';', ',']).trim().to_string()
}

/// Splits an identity excerpt into a name and an address. Line breaks
/// separate name and address; a single line splits at its first comma.
fn name_and_address(excerpt: &str) -> (String, String) {
    let body = LEAD_IN.replace(excerpt.trim(), "");
    let lines: Vec<&str> = body.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    match lines.as_slice() {
        [] => (clean(excerpt), String::new()),
        [single] => {
            let mut parts = single.split(',').map(clean).filter(|p| !p.is_empty());
            (parts.next().unwrap_or_default(), parts.collect::<Vec<_>>().join(", "))
        }
        [first, tail @ ..] => (clean(first), tail.iter().map(|l| clean(l)).collect::<Vec<_>>().join(", ")),
    }
}

fn contact_point(excerpt: &str) -> Option<ContactPoint> {
    let email = EMAIL.find(excerpt).map(|m| m.as_str().to_string());
    let phone = PHONE.find(excerpt).map(|m| m.as_str().trim().to_string());
    if email.is_none() && phone.is_none() {
        return None;
    }
    let (name, _) = name_and_address(excerpt);
    let name = match EMAIL.find(&name) {
        Some(m) => clean(&name[..m.start()]),
        None => name,
    };
    Some(ContactPoint { name, email, phone })
}

/// `Art. 6 Abs. 1 lit. f DSGVO` → `GDPR-6-1-f`.
pub(crate) fn legal_basis_of(excerpt: &str) -> Option<String> {
    ARTICLE.captures(excerpt).map(|c| format!("GDPR-{}-{}-{}", &c[1], &c[2], c[3].to_lowercase()))
}

fn contains_any(text: &str, needles: &[&str]) -> bool {
    let lower = text.to_lowercase();
    needles.iter().any(|n| lower.contains(n))
}

const ADEQUACY: &[&str] = &["angemessenheitsbeschluss", "adequacy decision", "angemessenes datenschutzniveau", "adequate level"];
const SAFEGUARDS: &[&str] = &[
    "standardvertragsklausel",
    "standard contractual clause",
    "standarddatenschutzklausel",
    "binding corporate rules",
    "verbindliche interne datenschutzvorschriften",
    "garantie",
    "safeguard",
];
const ADM_NEGATION: &[&str] = &["keine automatisierte", "nicht automatisiert", "no automated", "not use automated", "not subject to automated", "findet nicht statt", "does not take place"];

const RIGHT_KEYWORDS: [(&str, &[&str]); 6] = [
    ("access", &["auskunft", "access"]),
    ("rectification", &["berichtigung", "rectification", "correct"]),
    ("erasure", &["löschung", "erasure", "deletion", "vergessenwerden"]),
    ("restriction", &["einschränkung", "restriction", "restrict"]),
    ("portability", &["übertragbarkeit", "portability"]),
    ("objection", &["widerspruch", "object"]),
];

/// Builds a document from a finished task.
pub fn export_tilt(task: &AnnotationTask, seed: &ExportSeed) -> Result<TiltDocument, AnnotationError> {
    if !task.is_done() {
        return Err(AnnotationError::TaskNotDone { answered: task.cursor, total: task.question_queue.len() });
    }
    seed.check().map_err(AnnotationError::InvalidSeed)?;

    let excerpts = |field: FieldKey| -> Vec<String> {
        task.annotations_for(field).map(|a| a.excerpt.clone()).filter(|e| !e.trim().is_empty()).collect()
    };
    let first = |field: FieldKey| excerpts(field).into_iter().next();

    let created = task.annotations.iter().map(|a| a.at).max().or(seed.timestamp).unwrap_or(DateTime::UNIX_EPOCH);

    let controller = match first(FieldKey::ControllerIdentity) {
        Some(excerpt) => {
            let (name, address) = name_and_address(&excerpt);
            Controller {
                name,
                address,
                country: country_in(&excerpt).unwrap_or_else(|| seed.country.clone()),
                representative: first(FieldKey::ControllerRepresentative).and_then(|e| contact_point(&e)),
            }
        }
        None => Controller {
            name: String::new(),
            address: String::new(),
            country: seed.country.clone(),
            representative: first(FieldKey::ControllerRepresentative).and_then(|e| contact_point(&e)),
        },
    };

    let bases = excerpts(FieldKey::DataLegalBasis);
    let interest = first(FieldKey::DataLegitimateInterest).map(|e| clean(&e));
    let purposes: Vec<Purpose> = excerpts(FieldKey::DataPurposes)
        .iter()
        .enumerate()
        .map(|(i, excerpt)| {
            let legal_basis = legal_basis_of(excerpt)
                .or_else(|| bases.get(i).or(bases.first()).map(|b| legal_basis_of(b).unwrap_or_else(|| clean(b))))
                .unwrap_or_default();
            let legitimate_interest =
                if legal_basis == "GDPR-6-1-f" { interest.clone().or_else(|| Some(clean(excerpt))) } else { None };
            Purpose { description: clean(excerpt), legal_basis, legitimate_interest }
        })
        .collect();
    let recipients: Vec<Recipient> = excerpts(FieldKey::DataRecipients)
        .iter()
        .map(|e| Recipient {
            name: name_and_address(e).0,
            category: "recipient".to_string(),
            country: country_in(e).unwrap_or_else(|| seed.country.clone()),
        })
        .filter(|r| !r.name.is_empty())
        .collect();
    let storage = first(FieldKey::DataStorage).map(|e| {
        let value = clean(&e);
        if is_iso8601_duration(&value) {
            Storage { kind: StorageKind::Duration, value }
        } else {
            Storage { kind: StorageKind::Criterion, value }
        }
    });
    let requirement_note = first(FieldKey::DataRequirementNote).map(|e| clean(&e));
    let data_disclosed: Vec<DataDisclosed> = excerpts(FieldKey::DataCategories)
        .iter()
        .map(|e| clean(e))
        .filter(|c| !c.is_empty())
        .map(|category| DataDisclosed {
            category,
            purposes: purposes.clone(),
            recipients: recipients.clone(),
            storage: storage.clone(),
            requirement_note: requirement_note.clone(),
        })
        .collect();

    let third_country_transfers: Vec<ThirdCountryTransfer> = excerpts(FieldKey::Transfers)
        .iter()
        .filter_map(|e| {
            let country = country_in(e).filter(|c| !is_eu_eea(c))?;
            Some(ThirdCountryTransfer {
                country,
                adequacy_decision: contains_any(e, ADEQUACY),
                safeguards: contains_any(e, SAFEGUARDS).then(|| clean(e)),
            })
        })
        .collect();

    let mut rights = RightsInfo::default();
    for excerpt in excerpts(FieldKey::RightsCore) {
        for (name, words) in RIGHT_KEYWORDS {
            if !contains_any(&excerpt, words) {
                continue;
            }
            let slot = match name {
                "access" => &mut rights.access,
                "rectification" => &mut rights.rectification,
                "erasure" => &mut rights.erasure,
                "restriction" => &mut rights.restriction,
                "portability" => &mut rights.portability,
                _ => &mut rights.objection,
            };
            slot.get_or_insert_with(|| RightEntry::new(true, Some(clean(&excerpt))));
        }
    }
    rights.withdraw_consent = first(FieldKey::RightsWithdrawConsent).map(|e| RightEntry::new(true, Some(clean(&e))));
    rights.complaint_authority = first(FieldKey::RightsComplaintAuthority).and_then(|e| contact_point(&e));

    let automated_decision_making = first(FieldKey::Adm).map(|e| {
        if contains_any(&e, ADM_NEGATION) {
            AdmInfo { in_use: false, logic_description: None, consequences: None }
        } else {
            AdmInfo { in_use: true, logic_description: Some(clean(&e)), consequences: None }
        }
    });

    let doc = TiltDocument {
        meta: Meta {
            id: seed.id.clone(),
            name: seed.name.clone(),
            version: 1,
            created,
            modified: created,
            language: seed.language.clone(),
            hash: String::new(),
        },
        controller,
        dpo: first(FieldKey::DpoContact).and_then(|e| contact_point(&e)),
        data_disclosed,
        third_country_transfers,
        rights,
        automated_decision_making,
        sources: Vec::new(),
    };
    // from_value fills the hash and re-checks every invariant
    from_value(to_value(&doc)).map_err(AnnotationError::InvalidSeed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legal_basis_citations() {
        assert_eq!(legal_basis_of("gemäß Art. 6 Abs. 1 lit. f DSGVO").as_deref(), Some("GDPR-6-1-f"));
        assert_eq!(legal_basis_of("Art. 6 Abs. 1 S. 1 lit. a DSGVO").as_deref(), Some("GDPR-6-1-a"));
        assert_eq!(legal_basis_of("Article 6(1)(b) GDPR").as_deref(), Some("GDPR-6-1-b"));
        assert_eq!(legal_basis_of("weil wir es wollen"), None);
    }

    #[test]
    fn identity_split() {
        assert_eq!(
            name_and_address("Verantwortlich ist:\nACME GmbH\nHauptstr. 1\n10115 Berlin"),
            ("ACME GmbH".to_string(), "Hauptstr. 1, 10115 Berlin".to_string())
        );
        assert_eq!(
            name_and_address("Der Verantwortliche ist ACME GmbH, Hauptstr. 1, 10115 Berlin."),
            ("ACME GmbH".to_string(), "Hauptstr. 1, 10115 Berlin".to_string())
        );
    }

    #[test]
    fn countries() {
        assert_eq!(country_in("Server in den USA und Indien").as_deref(), Some("US"));
        assert_eq!(country_in("Hauptstr. 1, 10115 Berlin, DE").as_deref(), Some("DE"));
        assert_eq!(country_in("Berlin"), None);
        // "usa" inside another word does not count
        assert_eq!(country_in("Kausalität"), None);
    }

    #[test]
    fn contacts_need_email_or_phone() {
        let c = contact_point("Datenschutzbeauftragte: Erika Muster, dsb@acme.de").unwrap();
        assert_eq!(c.email.as_deref(), Some("dsb@acme.de"));
        assert_eq!(c.name, "Erika Muster");
        assert!(contact_point("Frau Muster").is_none());
        assert_eq!(contact_point("Tel. +49 30 1234567").unwrap().phone.as_deref(), Some("+49 30 1234567"));
    }
}
