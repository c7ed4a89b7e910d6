use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::DsarError;

pub const FORMAT_VERSION: &str = "dara/1";

/// Machine-readable description of the steps of one access request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DsarDescriptor {
    pub format_version: String,
    pub service: String,
    pub domain: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    SelectorPresent,
    DownloadReady,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityField {
    Email,
    FullName,
}

/// What a `Fill` step types: an identity attribute or a literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRef {
    Identity(IdentityField),
    Literal { literal: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase", deny_unknown_fields)]
pub enum Step {
    Navigate {
        url: String,
    },
    Click {
        selector: String,
    },
    Fill {
        selector: String,
        value_ref: ValueRef,
    },
    WaitFor {
        condition: Condition,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selector: Option<String>,
        timeout_seconds: u64,
    },
    Poll {
        condition: Condition,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selector: Option<String>,
        interval_seconds: u64,
        max_attempts: u32,
    },
    Download {
        selector: String,
    },
}

impl Step {
    pub fn kind(&self) -> &'static str {
        match self {
            Step::Navigate { .. } => "Navigate",
            Step::Click { .. } => "Click",
            Step::Fill { .. } => "Fill",
            Step::WaitFor { .. } => "WaitFor",
            Step::Poll { .. } => "Poll",
            Step::Download { .. } => "Download",
        }
    }
}

fn rule(step: usize, message: impl Into<String>) -> DsarError {
    DsarError::Descriptor { step: Some(step), message: message.into() }
}

impl DsarDescriptor {
    /// The selector a wait or poll step checks. `download-ready` without an
    /// explicit selector watches the next `Download` step's selector.
    pub fn condition_selector(&self, index: usize) -> Option<&str> {
        let (condition, selector) = match &self.steps[index] {
            Step::WaitFor { condition, selector, .. } | Step::Poll { condition, selector, .. } => (condition, selector),
            _ => return None,
        };
        match (condition, selector) {
            (_, Some(s)) => Some(s.as_str()),
            (Condition::DownloadReady, None) => self.steps[index + 1..].iter().find_map(|s| match s {
                Step::Download { selector } => Some(selector.as_str()),
                _ => None,
            }),
            (Condition::SelectorPresent, None) => None,
        }
    }

    pub fn check(&self) -> Result<(), DsarError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DsarError::Descriptor {
                step: None,
                message: format!("formatVersion must be {FORMAT_VERSION:?}, got {:?}", self.format_version),
            });
        }
        if self.steps.is_empty() {
            return Err(DsarError::Descriptor { step: None, message: "steps must not be empty".into() });
        }
        if !matches!(self.steps[0], Step::Navigate { .. }) {
            return Err(rule(0, "first step must be Navigate"));
        }
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Navigate { url } if url.trim().is_empty() => return Err(rule(i, "url must not be empty")),
                Step::Click { selector } | Step::Fill { selector, .. } | Step::Download { selector }
                    if selector.trim().is_empty() =>
                {
                    return Err(rule(i, "selector must not be empty"))
                }
                Step::WaitFor { timeout_seconds: 0, .. } => return Err(rule(i, "timeoutSeconds must be > 0")),
                Step::Poll { max_attempts: 0, .. } => return Err(rule(i, "maxAttempts must be >= 1")),
                Step::WaitFor { condition, selector, .. } | Step::Poll { condition, selector, .. } => {
                    if selector.as_deref().is_some_and(|s| s.trim().is_empty()) {
                        return Err(rule(i, "selector must not be empty"));
                    }
                    if *condition == Condition::SelectorPresent && selector.is_none() {
                        return Err(rule(i, "selector-present requires a selector"));
                    }
                    if self.condition_selector(i).is_none() {
                        return Err(rule(i, "download-ready without selector needs a later Download step"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form; identifies a descriptor across sessions.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let value = serde_json::to_value(self).expect("descriptor serializes");
        hex::encode(Sha256::digest(crate::tilt::canonical_json(&value).as_bytes()))
    }
}

/// Parses and checks descriptor text.
pub fn validate_descriptor(text: &str) -> Result<DsarDescriptor, DsarError> {
    let value: Value = serde_json::from_str(text).map_err(|e| DsarError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let descriptor: DsarDescriptor = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let step = path
            .strip_prefix("steps[")
            .and_then(|rest| rest.split(']').next())
            .and_then(|n| n.parse().ok());
        DsarError::Descriptor { step, message: format!("{path}: {}", e.inner()) }
    })?;
    descriptor.check()?;
    Ok(descriptor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_steps(steps: &str) -> String {
        format!(r#"{{"formatVersion": "dara/1", "service": "Example", "domain": "example.com", "steps": {steps}}}"#)
    }

    #[test]
    fn navigate_then_download_is_valid() {
        let d = validate_descriptor(&with_steps(
            r##"[{"type": "Navigate", "url": "https://example.com/export"}, {"type": "Download", "selector": "#dl"}]"##,
        ))
        .unwrap();
        assert_eq!(d.steps.len(), 2);
    }

    #[test]
    fn must_start_with_navigate() {
        let err = validate_descriptor(&with_steps(r##"[{"type": "Click", "selector": "#a"}]"##)).unwrap_err();
        assert_eq!(err, DsarError::Descriptor { step: Some(0), message: "first step must be Navigate".into() });
    }

    #[test]
    fn zero_timeout_rejected() {
        let err = validate_descriptor(&with_steps(
            r##"[{"type": "Navigate", "url": "u"}, {"type": "WaitFor", "condition": "selector-present", "selector": "#x", "timeoutSeconds": 0}]"##,
        ))
        .unwrap_err();
        assert_eq!(err.name(), "DescriptorError");
        assert!(matches!(err, DsarError::Descriptor { step: Some(1), .. }));
    }

    #[test]
    fn other_rules() {
        let cases = [
            (r##"[]"##, None),
            (r##"[{"type": "Navigate", "url": "u"}, {"type": "Click", "selector": " "}]"##, Some(1)),
            (r##"[{"type": "Navigate", "url": "u"}, {"type": "Poll", "condition": "selector-present", "intervalSeconds": 1, "maxAttempts": 2}]"##, Some(1)),
            (r##"[{"type": "Navigate", "url": "u"}, {"type": "Poll", "condition": "download-ready", "intervalSeconds": 1, "maxAttempts": 0}]"##, Some(1)),
            (r##"[{"type": "Navigate", "url": "u"}, {"type": "WaitFor", "condition": "download-ready", "timeoutSeconds": 5}]"##, Some(1)),
            (r##"[{"type": "Navigate", "url": "u"}, {"type": "Teleport"}]"##, Some(1)),
        ];
        for (steps, step) in cases {
            match validate_descriptor(&with_steps(steps)) {
                Err(DsarError::Descriptor { step: s, .. }) => assert_eq!(s, step, "{steps}"),
                other => panic!("{steps}: {other:?}"),
            }
        }
        let wrong_version = with_steps(r##"[{"type": "Navigate", "url": "u"}]"##).replace("dara/1", "dara/2");
        assert!(matches!(validate_descriptor(&wrong_version), Err(DsarError::Descriptor { step: None, .. })));
        assert_eq!(validate_descriptor("{").unwrap_err().name(), "SyntaxError");
    }

    #[test]
    fn download_ready_watches_next_download() {
        let d = validate_descriptor(&with_steps(
            r##"[{"type": "Navigate", "url": "u"}, {"type": "Poll", "condition": "download-ready", "intervalSeconds": 1, "maxAttempts": 2},
                 {"type": "Download", "selector": "#dl"}]"##,
        ))
        .unwrap();
        assert_eq!(d.condition_selector(1), Some("#dl"));
    }

    #[test]
    fn value_refs() {
        let d = validate_descriptor(&with_steps(
            r##"[{"type": "Navigate", "url": "u"}, {"type": "Fill", "selector": "#e", "valueRef": "EMAIL"},
                 {"type": "Fill", "selector": "#r", "valueRef": {"literal": "Auskunft nach Art. 15"}}]"##,
        ))
        .unwrap();
        assert_eq!(d.steps[1], Step::Fill { selector: "#e".into(), value_ref: ValueRef::Identity(IdentityField::Email) });
        assert!(matches!(&d.steps[2], Step::Fill { value_ref: ValueRef::Literal { .. }, .. }));
        assert_eq!(d.content_hash(), validate_descriptor(&serde_json::to_string_pretty(&d).unwrap()).unwrap().content_hash());
    }
}
