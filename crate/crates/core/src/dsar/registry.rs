use serde::{Deserialize, Serialize};

use super::DsarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Difficulty {
    DirectLink,
    Guided,
    Automated,
}

/// Where and how to request one's data from a service. The file form uses
/// `url` for the request URL; `hasDirectLink` defaults to
/// `difficulty == direct-link` when omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawRecord")]
pub struct RegistryRecord {
    pub service: String,
    pub domain: String,
    #[serde(rename = "url")]
    pub request_url: String,
    pub has_direct_link: bool,
    pub difficulty: Difficulty,
    pub notes: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawRecord {
    service: String,
    domain: String,
    #[serde(alias = "requestUrl")]
    url: String,
    #[serde(default)]
    has_direct_link: Option<bool>,
    difficulty: Difficulty,
    #[serde(default)]
    notes: String,
}

impl TryFrom<RawRecord> for RegistryRecord {
    type Error = String;

    fn try_from(raw: RawRecord) -> Result<Self, String> {
        if raw.domain.is_empty() || raw.domain != raw.domain.to_ascii_lowercase() {
            return Err(format!("domain {:?} must be lowercase and non-empty", raw.domain));
        }
        if raw.domain.contains("://") || raw.domain.contains('/') {
            return Err(format!("domain {:?} must not carry a scheme or path", raw.domain));
        }
        Ok(Self {
            has_direct_link: raw.has_direct_link.unwrap_or(raw.difficulty == Difficulty::DirectLink),
            service: raw.service,
            domain: raw.domain,
            request_url: raw.url,
            difficulty: raw.difficulty,
            notes: raw.notes,
        })
    }
}

/// Parses a registry file (a JSON array of records).
pub fn parse_registry(text: &str) -> Result<Vec<RegistryRecord>, DsarError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| DsarError::Registry(format!("{}: {}", e.path(), e.inner())))
}

/// Reduces a URL or host name to a bare lowercase host.
fn host_of(input: &str) -> String {
    let s = input.trim().to_ascii_lowercase();
    let s = s.split_once("://").map_or(s.as_str(), |(_, rest)| rest);
    let s = s.split(['/', '?', '#']).next().unwrap_or("");
    let s = s.rsplit_once('@').map_or(s, |(_, host)| host);
    let s = s.split(':').next().unwrap_or("");
    s.trim_end_matches('.').to_string()
}

/// Exact domain match first, then the longest registered domain the host
/// ends with (`mobile.twitter.com` finds `twitter.com`).
pub fn registry_lookup<'a>(registry: &'a [RegistryRecord], domain: &str) -> Option<&'a RegistryRecord> {
    let host = host_of(domain);
    if host.is_empty() {
        return None;
    }
    registry.iter().find(|r| r.domain == host).or_else(|| {
        registry
            .iter()
            .filter(|r| host.ends_with(&format!(".{}", r.domain)))
            .max_by_key(|r| r.domain.len())
    })
}
