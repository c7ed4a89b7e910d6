//! Code tables shipped as data files: ISO 3166-1 alpha-2, ISO 639-1 and the
//! EU/EEA membership list.

use std::collections::BTreeSet;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::Deserialize;

static COUNTRIES: Lazy<BTreeSet<&'static str>> =
    Lazy::new(|| include_str!("../../data/iso3166_alpha2.txt").split_whitespace().collect());

static LANGUAGES: Lazy<BTreeSet<&'static str>> =
    Lazy::new(|| include_str!("../../data/iso639_1.txt").split_whitespace().collect());

#[derive(Debug, Deserialize)]
pub struct EuEeaList {
    pub version: String,
    pub countries: BTreeSet<String>,
}

static EU_EEA: Lazy<EuEeaList> = Lazy::new(|| {
    serde_json::from_str(include_str!("../../data/eu_eea.json")).expect("bundled eu_eea.json is valid")
});

pub fn is_country_code(code: &str) -> bool {
    COUNTRIES.contains(code)
}

pub fn is_language_code(code: &str) -> bool {
    LANGUAGES.contains(code)
}

pub fn country_codes() -> impl Iterator<Item = &'static str> {
    COUNTRIES.iter().copied()
}

pub fn eu_eea() -> &'static EuEeaList {
    &EU_EEA
}

pub fn is_eu_eea(code: &str) -> bool {
    EU_EEA.countries.contains(code)
}

static LEGAL_BASIS: Lazy<Regex> = Lazy::new(|| Regex::new(r"^GDPR-(\d+)-(\d+)-([a-z])$").unwrap());

/// A legal basis in normative `GDPR-<art>-<para>-<lit>` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormativeBasis {
    pub article: u32,
    pub paragraph: u32,
    pub letter: char,
}

impl NormativeBasis {
    pub fn parse(s: &str) -> Option<Self> {
        let caps = LEGAL_BASIS.captures(s)?;
        Some(Self {
            article: caps[1].parse().ok()?,
            paragraph: caps[2].parse().ok()?,
            letter: caps[3].chars().next()?,
        })
    }

    pub fn is(&self, article: u32, paragraph: u32, letter: char) -> bool {
        self.article == article && self.paragraph == paragraph && self.letter == letter
    }
}

impl std::fmt::Display for NormativeBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GDPR-{}-{}-{}", self.article, self.paragraph, self.letter)
    }
}

/// Consent (`GDPR-6-1-a`).
pub fn is_consent_basis(s: &str) -> bool {
    NormativeBasis::parse(s).is_some_and(|b| b.is(6, 1, 'a'))
}

/// Legitimate interests (`GDPR-6-1-f`).
pub fn is_legitimate_interest_basis(s: &str) -> bool {
    NormativeBasis::parse(s).is_some_and(|b| b.is(6, 1, 'f'))
}

/// Checks ISO 8601 durations of the form `PnYnMnWnDTnHnMnS` (at least one
/// component, `T` only followed by time components, a fraction only on the
/// last component).
pub fn is_iso8601_duration(s: &str) -> bool {
    static DURATION: Lazy<Regex> = Lazy::new(|| {
        Regex::new(
            r"^P(?:(\d+(?:[.,]\d+)?)Y)?(?:(\d+(?:[.,]\d+)?)M)?(?:(\d+(?:[.,]\d+)?)W)?(?:(\d+(?:[.,]\d+)?)D)?(?:T(?:(\d+(?:[.,]\d+)?)H)?(?:(\d+(?:[.,]\d+)?)M)?(?:(\d+(?:[.,]\d+)?)S)?)?$",
        )
        .unwrap()
    });
    let Some(caps) = DURATION.captures(s) else {
        return false;
    };
    let parts: Vec<&str> = caps.iter().skip(1).flatten().map(|m| m.as_str()).collect();
    if parts.is_empty() {
        return false;
    }
    if s.ends_with('T') {
        return false;
    }
    // only the smallest given component may carry a fraction
    let fractional = parts.iter().position(|p| p.contains(['.', ',']));
    fractional.is_none_or(|i| i == parts.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_tables() {
        assert!(is_country_code("DE"));
        assert!(is_country_code("US"));
        assert!(!is_country_code("XX"));
        assert!(!is_country_code("de"));
        assert_eq!(country_codes().count(), 249);
        assert!(is_language_code("de"));
        assert!(!is_language_code("xx"));
        assert!(is_eu_eea("NO"));
        assert!(!is_eu_eea("GB"));
        assert!(!is_eu_eea("US"));
        assert_eq!(eu_eea().countries.len(), 30);
    }

    #[test]
    fn legal_bases() {
        assert!(is_consent_basis("GDPR-6-1-a"));
        assert!(is_legitimate_interest_basis("GDPR-6-1-f"));
        assert!(!is_legitimate_interest_basis("GDPR-6-1-b"));
        assert!(NormativeBasis::parse("Art. 6 DSGVO").is_none());
        assert!(NormativeBasis::parse("GDPR-6-1").is_none());
        assert_eq!(NormativeBasis::parse("GDPR-9-2-a").unwrap().to_string(), "GDPR-9-2-a");
    }

    #[test]
    fn durations() {
        for ok in ["P1Y", "P6M", "PT24H", "P1Y2M3DT4H5M6S", "P2W", "P0.5Y", "PT1.5S"] {
            assert!(is_iso8601_duration(ok), "{ok}");
        }
        for bad in ["", "P", "PT", "1Y", "P1YT", "P1.5Y2M", "six months", "P1H"] {
            assert!(!is_iso8601_duration(bad), "{bad}");
        }
    }
}
