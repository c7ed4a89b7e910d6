//! Deterministic answers to common questions about a document.
//!
//! Each intent has one template per language (`de`, `en`; other languages
//! fall back to `en`). Placeholders are filled only from document fields,
//! and every field read is reported in [`Answer::evidence_paths`].
//! [`answer_traced`] additionally returns which path produced each piece of
//! interpolated text.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use transparency_core::tilt::TiltDocument;

use crate::HubError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntentKind {
    ControllerIdentity,
    ThirdCountryTransfers,
    PurposesForCategory,
    RetentionForCategory,
    AdmInUse,
    RightsSummary,
}

impl IntentKind {
    pub const ALL: [IntentKind; 6] = [
        IntentKind::ControllerIdentity,
        IntentKind::ThirdCountryTransfers,
        IntentKind::PurposesForCategory,
        IntentKind::RetentionForCategory,
        IntentKind::AdmInUse,
        IntentKind::RightsSummary,
    ];

    pub fn needs_category(self) -> bool {
        matches!(self, IntentKind::PurposesForCategory | IntentKind::RetentionForCategory)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intent {
    pub kind: IntentKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

impl Intent {
    pub fn new(kind: IntentKind) -> Self {
        Self { kind, params: BTreeMap::new() }
    }

    pub fn for_category(kind: IntentKind, category: impl Into<String>) -> Self {
        Self { kind, params: BTreeMap::from([("category".to_string(), category.into())]) }
    }

    pub fn check(&self) -> Result<(), HubError> {
        if self.kind.needs_category() && self.params.get("category").is_none_or(|c| c.is_empty()) {
            return Err(HubError::InvalidIntent(format!("{:?} needs a category parameter", self.kind)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Answer {
    pub answer_text: String,
    pub evidence_paths: Vec<String>,
}

/// How an interpolated text relates to the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "source")]
pub enum Source {
    /// The scalar at `path`, verbatim.
    Value,
    /// The length of the list at `path`.
    Count,
    /// The boolean at `path`, rendered as the vocabulary word `word`.
    Flag { word: String },
    /// `path` is absent or blank; rendered as the "unknown" word.
    Missing,
    /// Nothing under `path` qualifies; rendered as the "none" word.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Interpolation {
    pub placeholder: String,
    pub path: String,
    #[serde(flatten)]
    pub source: Source,
    pub text: String,
}

#[derive(Debug, Deserialize)]
struct Language {
    templates: BTreeMap<IntentKind, String>,
    words: BTreeMap<String, String>,
}

static TEMPLATES: Lazy<BTreeMap<String, Language>> =
    Lazy::new(|| serde_json::from_str(include_str!("../data/qa_templates.json")).expect("bundled Q&A templates"));

fn language(code: &str) -> &'static Language {
    TEMPLATES.get(code).unwrap_or_else(|| &TEMPLATES["en"])
}

/// Template text for an intent in a language (with `en` fallback).
pub fn template(language_code: &str, kind: IntentKind) -> &'static str {
    &language(language_code).templates[&kind]
}

/// A vocabulary word (`none`, `unknown`, `yes`, `no`, `separator`, or a
/// right name) in a language (with `en` fallback).
pub fn word(language_code: &str, key: &str) -> &'static str {
    language(language_code)
        .words
        .get(key)
        .or_else(|| language("en").words.get(key))
        .map(String::as_str)
        .unwrap_or_else(|| panic!("no word {key:?} in the template data"))
}

struct Builder<'a> {
    lang: &'a str,
    evidence: Vec<String>,
    slots: Vec<Interpolation>,
}

impl Builder<'_> {
    fn read(&mut self, path: &str) {
        if !self.evidence.iter().any(|p| p == path) {
            self.evidence.push(path.to_string());
        }
    }

    fn put(&mut self, placeholder: &str, path: String, source: Source, text: String) {
        self.read(&path);
        self.slots.push(Interpolation { placeholder: placeholder.to_string(), path, source, text });
    }

    fn value(&mut self, placeholder: &str, path: String, text: &str) {
        if text.trim().is_empty() {
            self.missing(placeholder, path);
        } else {
            self.put(placeholder, path, Source::Value, text.to_string());
        }
    }

    fn missing(&mut self, placeholder: &str, path: String) {
        let text = word(self.lang, "unknown").to_string();
        self.put(placeholder, path, Source::Missing, text);
    }

    fn empty(&mut self, placeholder: &str, path: String) {
        let text = word(self.lang, "none").to_string();
        self.put(placeholder, path, Source::Empty, text);
    }

    fn flag(&mut self, placeholder: &str, path: String, word_key: &str) {
        let text = word(self.lang, word_key).to_string();
        self.put(placeholder, path, Source::Flag { word: word_key.to_string() }, text);
    }
}

fn category_index(doc: &TiltDocument, intent: &Intent) -> Result<usize, HubError> {
    let category = &intent.params["category"];
    doc.data_disclosed
        .iter()
        .position(|d| &d.category == category)
        .ok_or_else(|| HubError::UnknownCategory(category.clone()))
}

/// Fills a template by substituting each `{placeholder}` with its
/// interpolations joined by the language's separator.
pub fn render(template: &str, slots: &[Interpolation], separator: &str) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').map(|c| open + c).expect("balanced template braces");
        out.push_str(&rest[..open]);
        let name = &rest[open + 1..close];
        let parts: Vec<&str> = slots.iter().filter(|s| s.placeholder == name).map(|s| s.text.as_str()).collect();
        out.push_str(&parts.join(separator));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

/// Answers `intent` and reports where each interpolated text came from.
pub fn answer_traced(doc: &TiltDocument, intent: &Intent) -> Result<(Answer, Vec<Interpolation>), HubError> {
    intent.check()?;
    let lang = doc.meta.language.as_str();
    let mut b = Builder { lang, evidence: Vec::new(), slots: Vec::new() };
    match intent.kind {
        IntentKind::ControllerIdentity => {
            let c = &doc.controller;
            b.value("name", "controller/name".into(), &c.name);
            b.value("address", "controller/address".into(), &c.address);
            b.value("country", "controller/country".into(), &c.country);
        }
        IntentKind::ThirdCountryTransfers => {
            let transfers = &doc.third_country_transfers;
            b.put("count", "thirdCountryTransfers".into(), Source::Count, transfers.len().to_string());
            if transfers.is_empty() {
                b.empty("countries", "thirdCountryTransfers".into());
            }
            for (k, t) in transfers.iter().enumerate() {
                b.value("countries", format!("thirdCountryTransfers/{k}/country"), &t.country);
            }
        }
        IntentKind::PurposesForCategory => {
            let i = category_index(doc, intent)?;
            let d = &doc.data_disclosed[i];
            b.value("category", format!("dataDisclosed/{i}/category"), &d.category);
            if d.purposes.is_empty() {
                b.empty("purposes", format!("dataDisclosed/{i}/purposes"));
                b.empty("legalBases", format!("dataDisclosed/{i}/purposes"));
            }
            for (j, p) in d.purposes.iter().enumerate() {
                b.value("purposes", format!("dataDisclosed/{i}/purposes/{j}/description"), &p.description);
            }
            let mut seen: Vec<&str> = Vec::new();
            for (j, p) in d.purposes.iter().enumerate() {
                let path = format!("dataDisclosed/{i}/purposes/{j}/legalBasis");
                if seen.contains(&p.legal_basis.as_str()) {
                    b.read(&path);
                } else {
                    seen.push(&p.legal_basis);
                    b.value("legalBases", path, &p.legal_basis);
                }
            }
        }
        IntentKind::RetentionForCategory => {
            let i = category_index(doc, intent)?;
            let d = &doc.data_disclosed[i];
            b.value("category", format!("dataDisclosed/{i}/category"), &d.category);
            match &d.storage {
                Some(s) => {
                    b.read(&format!("dataDisclosed/{i}/storage/kind"));
                    b.value("storage", format!("dataDisclosed/{i}/storage/value"), &s.value);
                }
                None => b.missing("storage", format!("dataDisclosed/{i}/storage")),
            }
        }
        IntentKind::AdmInUse => match &doc.automated_decision_making {
            Some(adm) => b.flag("inUse", "automatedDecisionMaking/inUse".into(), if adm.in_use { "yes" } else { "no" }),
            None => b.missing("inUse", "automatedDecisionMaking/inUse".into()),
        },
        IntentKind::RightsSummary => {
            let mut any = false;
            let rights = doc.rights.core_rights().into_iter().chain([("withdrawConsent", doc.rights.withdraw_consent.as_ref())]);
            for (name, entry) in rights {
                let path = format!("rights/{name}/available");
                match entry {
                    Some(e) if e.available => {
                        any = true;
                        b.flag("rights", path, name);
                    }
                    Some(_) => b.read(&path),
                    None => {}
                }
            }
            if !any {
                b.empty("rights", "rights".into());
            }
            match &doc.rights.complaint_authority {
                Some(a) => b.value("authority", "rights/complaintAuthority/name".into(), &a.name),
                None => b.missing("authority", "rights/complaintAuthority".into()),
            }
        }
    }
    let text = render(template(lang, intent.kind), &b.slots, word(lang, "separator"));
    Ok((Answer { answer_text: text, evidence_paths: b.evidence }, b.slots))
}

pub fn answer_question(doc: &TiltDocument, intent: &Intent) -> Result<Answer, HubError> {
    answer_traced(doc, intent).map(|(a, _)| a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_language_has_every_template() {
        for (code, lang) in TEMPLATES.iter() {
            for kind in IntentKind::ALL {
                assert!(lang.templates.contains_key(&kind), "{code} {kind:?}");
            }
            for key in ["separator", "none", "unknown", "yes", "no", "access", "rectification", "erasure", "restriction", "portability", "objection", "withdrawConsent"] {
                assert!(lang.words.contains_key(key), "{code} {key}");
            }
        }
        assert_eq!(template("fr", IntentKind::AdmInUse), template("en", IntentKind::AdmInUse));
    }

    #[test]
    fn intents_deserialize() {
        let i: Intent = serde_json::from_str(r#"{"kind": "PURPOSES_FOR_CATEGORY", "params": {"category": "email"}}"#).unwrap();
        assert_eq!(i, Intent::for_category(IntentKind::PurposesForCategory, "email"));
        let i: Intent = serde_json::from_str(r#"{"kind": "RETENTION_FOR_CATEGORY"}"#).unwrap();
        assert_eq!(i.check().unwrap_err().name(), "InvalidIntentError");
    }

    #[test]
    fn rendering_joins_repeated_placeholders() {
        let slot = |p: &str, t: &str| Interpolation { placeholder: p.into(), path: String::new(), source: Source::Value, text: t.into() };
        let text = render("{a} and {b}.", &[slot("a", "x"), slot("b", "y"), slot("a", "z")], ", ");
        assert_eq!(text, "x, z and y.");
    }
}
