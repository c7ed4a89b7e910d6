//! Privacy labels: a 0–100 score with an auditable penalty breakdown, a
//! traffic-light label and an at-a-glance summary card.
//!
//! | code | points |
//! |------|--------|
//! | `TRACKERS` | −min(40, 4 · trackerCount) |
//! | `PHISH` | −50 when flagged |
//! | `TRANSFER` | −10 per transfer without adequacy decision or safeguards, at most −20 |
//! | `ADM_OPAQUE` | −10 when ADM is in use without a logic description |
//! | `MISSING` | −2 per missing checklist item other than C08/C14, at most −20 |
//! | `TOSDR` | A +5, B 0, C −3, D −6, E −10 |
//! | `PSPY` | −round(10 − privacySpyScore) |
//!
//! C08 and C14 are left out of `MISSING` because `TRANSFER` and `ADM_OPAQUE`
//! already price exactly those gaps. Rules worth zero points are omitted
//! from the breakdown.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tilt::{check_completeness, CheckCode, TiltDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TosdrGrade {
    A,
    B,
    C,
    D,
    E,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExternalSignals {
    #[serde(default)]
    pub tracker_count: u32,
    #[serde(default)]
    pub phishing_flagged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tosdr_grade: Option<TosdrGrade>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub privacy_spy_score: Option<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SignalsError {
    #[error("SignalsError: {0}")]
    Syntax(String),
    #[error("SignalsError at {domain}: privacySpyScore {value} outside [0, 10]")]
    Range { domain: String, value: f64 },
}

impl ExternalSignals {
    pub fn check(&self) -> Result<(), f64> {
        match self.privacy_spy_score {
            Some(s) if !(0.0..=10.0).contains(&s) => Err(s),
            _ => Ok(()),
        }
    }
}

/// Signals file: a JSON object keyed by domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalsFile(pub BTreeMap<String, ExternalSignals>);

impl SignalsFile {
    pub fn parse(text: &str) -> Result<Self, SignalsError> {
        let file: SignalsFile = serde_json::from_str(text).map_err(|e| SignalsError::Syntax(e.to_string()))?;
        for (domain, s) in &file.0 {
            s.check().map_err(|value| SignalsError::Range { domain: domain.clone(), value })?;
        }
        Ok(file)
    }

    /// Exact domain, then the domain without a leading `www.`.
    pub fn lookup(&self, domain: &str) -> Option<&ExternalSignals> {
        let domain = domain.trim().to_ascii_lowercase();
        self.0
            .get(&domain)
            .or_else(|| domain.strip_prefix("www.").and_then(|d| self.0.get(d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Green,
    Yellow,
    Red,
}

impl Label {
    pub fn for_score(score: u8) -> Self {
        match score {
            70.. => Label::Green,
            40..=69 => Label::Yellow,
            _ => Label::Red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreItem {
    pub code: String,
    pub points: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreReport {
    pub score: u8,
    pub label: Label,
    pub breakdown: Vec<ScoreItem>,
    pub raw_score: i32,
}

pub fn compute_score(doc: &TiltDocument, signals: &ExternalSignals) -> ScoreReport {
    let mut rules: Vec<(&str, i32)> = Vec::new();

    let trackers = i64::from(signals.tracker_count) * 4;
    rules.push(("TRACKERS", -(trackers.min(40) as i32)));
    rules.push(("PHISH", if signals.phishing_flagged { -50 } else { 0 }));

    let unprotected = doc.third_country_transfers.iter().filter(|t| t.is_unprotected()).count() as i32;
    rules.push(("TRANSFER", -(10 * unprotected).min(20)));

    let opaque = doc
        .automated_decision_making
        .as_ref()
        .is_some_and(|a| a.in_use && a.logic_description.as_deref().is_none_or(|s| s.trim().is_empty()));
    rules.push(("ADM_OPAQUE", if opaque { -10 } else { 0 }));

    let missing = check_completeness(doc)
        .missing()
        .filter(|c| !matches!(c, CheckCode::C08 | CheckCode::C14))
        .count() as i32;
    rules.push(("MISSING", -(2 * missing).min(20)));

    let tosdr = match signals.tosdr_grade {
        Some(TosdrGrade::A) => 5,
        Some(TosdrGrade::B) | None => 0,
        Some(TosdrGrade::C) => -3,
        Some(TosdrGrade::D) => -6,
        Some(TosdrGrade::E) => -10,
    };
    rules.push(("TOSDR", tosdr));

    let pspy = signals.privacy_spy_score.map_or(0, |s| -((10.0 - s.clamp(0.0, 10.0)).round() as i32));
    rules.push(("PSPY", pspy));

    let breakdown: Vec<ScoreItem> = rules
        .into_iter()
        .filter(|&(_, p)| p != 0)
        .map(|(code, points)| ScoreItem { code: code.to_string(), points })
        .collect();
    let raw_score = 100 + breakdown.iter().map(|i| i.points).sum::<i32>();
    let score = raw_score.clamp(0, 100) as u8;
    ScoreReport { score, label: Label::for_score(score), breakdown, raw_score }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryCard {
    pub controller_name: String,
    pub transfer_count: usize,
    pub adm_in_use: bool,
    pub tracker_count: u32,
    pub missing_disclosures: usize,
}

pub fn summarize(doc: &TiltDocument, signals: &ExternalSignals) -> SummaryCard {
    SummaryCard {
        controller_name: doc.controller.name.clone(),
        transfer_count: doc.third_country_transfers.len(),
        adm_in_use: doc.automated_decision_making.as_ref().is_some_and(|a| a.in_use),
        tracker_count: signals.tracker_count,
        missing_disclosures: check_completeness(doc).missing_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(Label::for_score(100), Label::Green);
        assert_eq!(Label::for_score(70), Label::Green);
        assert_eq!(Label::for_score(69), Label::Yellow);
        assert_eq!(Label::for_score(40), Label::Yellow);
        assert_eq!(Label::for_score(39), Label::Red);
        assert_eq!(Label::for_score(0), Label::Red);
    }

    #[test]
    fn signals_file() {
        let f = SignalsFile::parse(
            r#"{"example.com": {"trackerCount": 3, "tosdrGrade": "C"}, "spy.example": {"privacySpyScore": 7.5}}"#,
        )
        .unwrap();
        assert_eq!(f.lookup("WWW.example.com").unwrap().tracker_count, 3);
        assert_eq!(f.lookup("spy.example").unwrap().privacy_spy_score, Some(7.5));
        assert!(f.lookup("other.example").is_none());
        assert!(matches!(
            SignalsFile::parse(r#"{"x": {"privacySpyScore": 11}}"#),
            Err(SignalsError::Range { .. })
        ));
        assert!(SignalsFile::parse(r#"{"x": {"trackerCount": -1}}"#).is_err());
    }
}
