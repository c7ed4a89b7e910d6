//! Fourteen-item disclosure checklist.
//!
//! | code | requirement | not applicable when |
//! |------|-------------|---------------------|
//! | C01 | controller name and address | never |
//! | C02 | representative | controller in EU/EEA |
//! | C03 | DPO contact | no DPO named |
//! | C04 | ≥1 purpose per category (missing if no categories) | never |
//! | C05 | legal basis on every purpose (missing if no purposes) | never |
//! | C06 | legitimate interest on every `GDPR-6-1-f` purpose | no such purpose |
//! | C07 | ≥1 recipient per category (missing if no categories) | never |
//! | C08 | adequacy or safeguards on every transfer | no transfers |
//! | C09 | storage entry per category (missing if no categories) | never |
//! | C10 | access, rectification, erasure, restriction, portability, objection | never |
//! | C11 | consent withdrawal right | no `GDPR-6-1-a` purpose |
//! | C12 | complaint authority | never |
//! | C13 | requirement note per category | no categories |
//! | C14 | logic description when ADM is in use | no ADM section |

use serde::{Deserialize, Serialize};

use super::codes::{is_consent_basis, is_eu_eea, is_legitimate_interest_basis};
use super::TiltDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckCode {
    C01,
    C02,
    C03,
    C04,
    C05,
    C06,
    C07,
    C08,
    C09,
    C10,
    C11,
    C12,
    C13,
    C14,
}

impl CheckCode {
    pub const ALL: [CheckCode; 14] = [
        CheckCode::C01,
        CheckCode::C02,
        CheckCode::C03,
        CheckCode::C04,
        CheckCode::C05,
        CheckCode::C06,
        CheckCode::C07,
        CheckCode::C08,
        CheckCode::C09,
        CheckCode::C10,
        CheckCode::C11,
        CheckCode::C12,
        CheckCode::C13,
        CheckCode::C14,
    ];

    pub fn description(self) -> &'static str {
        match self {
            CheckCode::C01 => "controller identity and contact",
            CheckCode::C02 => "representative of a non-EU/EEA controller",
            CheckCode::C03 => "data protection officer contact",
            CheckCode::C04 => "purpose for every data category",
            CheckCode::C05 => "legal basis for every purpose",
            CheckCode::C06 => "legitimate interests pursued",
            CheckCode::C07 => "recipients for every data category",
            CheckCode::C08 => "adequacy decision or safeguards for every third-country transfer",
            CheckCode::C09 => "storage period for every data category",
            CheckCode::C10 => "data subject rights",
            CheckCode::C11 => "right to withdraw consent",
            CheckCode::C12 => "right to lodge a complaint with a supervisory authority",
            CheckCode::C13 => "statutory or contractual requirement",
            CheckCode::C14 => "automated decision-making and its logic",
        }
    }
}

impl std::fmt::Display for CheckCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Present,
    Missing,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckItem {
    pub key: CheckCode,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub items: Vec<CheckItem>,
}

impl CompletenessReport {
    pub fn missing(&self) -> impl Iterator<Item = CheckCode> + '_ {
        self.items.iter().filter(|i| i.status == CheckStatus::Missing).map(|i| i.key)
    }

    pub fn missing_count(&self) -> usize {
        self.missing().count()
    }

    pub fn status(&self, code: CheckCode) -> CheckStatus {
        self.items[code as usize].status
    }
}

fn blank(s: Option<&str>) -> bool {
    s.is_none_or(|s| s.trim().is_empty())
}

struct Outcome(CheckStatus, Option<String>);

fn present(path: impl Into<String>) -> Outcome {
    Outcome(CheckStatus::Present, Some(path.into()))
}

fn missing(path: impl Into<String>) -> Outcome {
    Outcome(CheckStatus::Missing, Some(path.into()))
}

fn not_applicable() -> Outcome {
    Outcome(CheckStatus::NotApplicable, None)
}

/// Per-category rule: missing when nothing is disclosed, otherwise missing at
/// the first category failing `ok`.
fn per_category(doc: &TiltDocument, field: &str, ok: impl Fn(&super::DataDisclosed) -> bool) -> Outcome {
    if doc.data_disclosed.is_empty() {
        return missing("dataDisclosed");
    }
    match doc.data_disclosed.iter().position(|d| !ok(d)) {
        Some(i) => missing(format!("dataDisclosed/{i}/{field}")),
        None => present("dataDisclosed"),
    }
}

fn evaluate(doc: &TiltDocument, code: CheckCode) -> Outcome {
    let c = &doc.controller;
    match code {
        CheckCode::C01 => {
            if c.name.trim().is_empty() {
                missing("controller/name")
            } else if c.address.trim().is_empty() {
                missing("controller/address")
            } else {
                present("controller")
            }
        }
        CheckCode::C02 => {
            if is_eu_eea(&c.country) {
                not_applicable()
            } else if c.representative.is_some() {
                present("controller/representative")
            } else {
                missing("controller/representative")
            }
        }
        CheckCode::C03 => match &doc.dpo {
            Some(_) => present("dpo"),
            None => not_applicable(),
        },
        CheckCode::C04 => per_category(doc, "purposes", |d| !d.purposes.is_empty()),
        CheckCode::C05 => {
            let mut any = false;
            for (i, j, p) in doc.purposes() {
                any = true;
                if p.legal_basis.trim().is_empty() {
                    return missing(format!("dataDisclosed/{i}/purposes/{j}/legalBasis"));
                }
            }
            if any {
                present("dataDisclosed")
            } else {
                missing("dataDisclosed")
            }
        }
        CheckCode::C06 => {
            let mut applicable = false;
            for (i, j, p) in doc.purposes() {
                if is_legitimate_interest_basis(&p.legal_basis) {
                    applicable = true;
                    if blank(p.legitimate_interest.as_deref()) {
                        return missing(format!("dataDisclosed/{i}/purposes/{j}/legitimateInterest"));
                    }
                }
            }
            if applicable {
                present("dataDisclosed")
            } else {
                not_applicable()
            }
        }
        CheckCode::C07 => per_category(doc, "recipients", |d| !d.recipients.is_empty()),
        CheckCode::C08 => {
            if doc.third_country_transfers.is_empty() {
                return not_applicable();
            }
            match doc.third_country_transfers.iter().position(|t| t.is_unprotected()) {
                Some(i) => missing(format!("thirdCountryTransfers/{i}/safeguards")),
                None => present("thirdCountryTransfers"),
            }
        }
        CheckCode::C09 => per_category(doc, "storage", |d| d.storage.is_some()),
        CheckCode::C10 => match doc.rights.core_rights().iter().find(|(_, e)| e.is_none()) {
            Some((name, _)) => missing(format!("rights/{name}")),
            None => present("rights"),
        },
        CheckCode::C11 => {
            if !doc.purposes().any(|(_, _, p)| is_consent_basis(&p.legal_basis)) {
                not_applicable()
            } else if doc.rights.withdraw_consent.is_some() {
                present("rights/withdrawConsent")
            } else {
                missing("rights/withdrawConsent")
            }
        }
        CheckCode::C12 => match &doc.rights.complaint_authority {
            Some(_) => present("rights/complaintAuthority"),
            None => missing("rights/complaintAuthority"),
        },
        CheckCode::C13 => {
            if doc.data_disclosed.is_empty() {
                not_applicable()
            } else {
                per_category(doc, "requirementNote", |d| !blank(d.requirement_note.as_deref()))
            }
        }
        CheckCode::C14 => match &doc.automated_decision_making {
            None => not_applicable(),
            Some(adm) if adm.in_use && blank(adm.logic_description.as_deref()) => {
                missing("automatedDecisionMaking/logicDescription")
            }
            Some(_) => present("automatedDecisionMaking"),
        },
    }
}

pub fn check_completeness(doc: &TiltDocument) -> CompletenessReport {
    CompletenessReport {
        items: CheckCode::ALL
            .iter()
            .map(|&key| {
                let Outcome(status, evidence_path) = evaluate(doc, key);
                CheckItem { key, status, evidence_path }
            })
            .collect(),
    }
}
