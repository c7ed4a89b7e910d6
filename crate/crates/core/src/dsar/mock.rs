//! Scripted site driver backed by a page graph.
//!
//! ```json
//! {
//!   "startPage": "settings",
//!   "pages": {
//!     "settings": {
//!       "url": "https://example.com/settings",
//!       "elements": {
//!         "#email":   { "fillable": true },
//!         "#request": { "click": { "goto": "status", "setFlag": "requested" } }
//!       }
//!     },
//!     "status": {
//!       "url": "https://example.com/status",
//!       "elements": {
//!         "#download": { "requiresFlag": "requested", "readyAfterChecks": 2, "download": "archive bytes" }
//!       }
//!     }
//!   }
//! }
//! ```
//!
//! An element with `readyAfterChecks: n` is reported absent by the first `n`
//! `exists` calls and present afterwards.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::driver::{DriverCall, DriverError, SiteDriver};
use super::DsarError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ClickEffect {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goto: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_flag: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Element {
    #[serde(default)]
    pub fillable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub click: Option<ClickEffect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_flag: Option<String>,
    #[serde(default)]
    pub ready_after_checks: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub download: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Page {
    pub url: String,
    #[serde(default)]
    pub elements: BTreeMap<String, Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MockFixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_page: Option<String>,
    pub pages: BTreeMap<String, Page>,
}

impl MockFixture {
    pub fn parse(text: &str) -> Result<Self, DsarError> {
        let fixture: MockFixture = serde_json::from_str(text).map_err(|e| DsarError::Fixture(e.to_string()))?;
        let known = |p: &String| fixture.pages.contains_key(p);
        if let Some(start) = &fixture.start_page {
            if !known(start) {
                return Err(DsarError::Fixture(format!("startPage {start:?} is not a page")));
            }
        }
        for (id, page) in &fixture.pages {
            for (selector, el) in &page.elements {
                if let Some(target) = el.click.as_ref().and_then(|c| c.goto.as_ref()) {
                    if !known(target) {
                        return Err(DsarError::Fixture(format!("{id}/{selector}: goto {target:?} is not a page")));
                    }
                }
            }
        }
        Ok(fixture)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MockState {
    current: Option<String>,
    flags: BTreeSet<String>,
    /// `exists` calls per `page selector`.
    checks: BTreeMap<String, u32>,
}

/// Deterministic [`SiteDriver`] over a [`MockFixture`].
#[derive(Debug, Clone)]
pub struct MockDriver {
    fixture: MockFixture,
    state: MockState,
    filled: BTreeMap<String, String>,
    log: Vec<DriverCall>,
}

impl MockDriver {
    pub fn new(fixture: MockFixture) -> Self {
        let state = MockState { current: fixture.start_page.clone(), ..Default::default() };
        Self { fixture, state, filled: BTreeMap::new(), log: Vec::new() }
    }

    pub fn current_page(&self) -> Option<&str> {
        self.state.current.as_deref()
    }

    /// Values typed into fillable elements, keyed by selector.
    pub fn filled(&self) -> &BTreeMap<String, String> {
        &self.filled
    }

    fn element(&self, selector: &str) -> Option<(&str, &Element)> {
        let page = self.state.current.as_deref()?;
        let el = self.fixture.pages.get(page)?.elements.get(selector)?;
        if el.requires_flag.as_ref().is_some_and(|f| !self.state.flags.contains(f)) {
            return None;
        }
        Some((page, el))
    }

    fn ready(&self, page: &str, selector: &str, el: &Element) -> bool {
        let seen = self.state.checks.get(&format!("{page} {selector}")).copied().unwrap_or(0);
        el.ready_after_checks == 0 || seen > el.ready_after_checks
    }

    fn usable(&self, selector: &str) -> Result<(String, Element), DriverError> {
        match self.element(selector) {
            Some((page, el)) if self.ready(page, selector, el) => Ok((page.to_string(), el.clone())),
            _ => Err(DriverError(format!("element {selector:?} not available"))),
        }
    }
}

impl SiteDriver for MockDriver {
    fn navigate(&mut self, url: &str) -> Result<(), DriverError> {
        self.log.push(DriverCall::Navigate { url: url.to_string() });
        let page = self
            .fixture
            .pages
            .iter()
            .find(|(_, p)| p.url == url)
            .map(|(id, _)| id.clone())
            .ok_or_else(|| DriverError(format!("no page for {url}")))?;
        self.state.current = Some(page);
        Ok(())
    }

    fn exists(&mut self, selector: &str) -> Result<bool, DriverError> {
        self.log.push(DriverCall::Exists { selector: selector.to_string() });
        let Some((page, _)) = self.element(selector) else { return Ok(false) };
        let key = format!("{page} {selector}");
        *self.state.checks.entry(key).or_default() += 1;
        let (page, el) = self.element(selector).map(|(p, e)| (p.to_string(), e.clone())).unwrap();
        Ok(self.ready(&page, selector, &el))
    }

    fn click(&mut self, selector: &str) -> Result<(), DriverError> {
        self.log.push(DriverCall::Click { selector: selector.to_string() });
        let (_, el) = self.usable(selector)?;
        if let Some(effect) = el.click {
            if let Some(flag) = effect.set_flag {
                self.state.flags.insert(flag);
            }
            if let Some(page) = effect.goto {
                self.state.current = Some(page);
            }
        }
        Ok(())
    }

    fn fill(&mut self, selector: &str, text: &str) -> Result<(), DriverError> {
        self.log.push(DriverCall::Fill { selector: selector.to_string(), text: text.to_string() });
        let (_, el) = self.usable(selector)?;
        if !el.fillable {
            return Err(DriverError(format!("element {selector:?} is not fillable")));
        }
        self.filled.insert(selector.to_string(), text.to_string());
        Ok(())
    }

    fn fetch_download(&mut self, selector: &str) -> Result<Vec<u8>, DriverError> {
        self.log.push(DriverCall::FetchDownload { selector: selector.to_string() });
        let (_, el) = self.usable(selector)?;
        el.download.map(String::into_bytes).ok_or_else(|| DriverError(format!("element {selector:?} offers no download")))
    }

    fn call_log(&self) -> &[DriverCall] {
        &self.log
    }

    fn snapshot(&self) -> Option<Value> {
        Some(serde_json::to_value(&self.state).expect("mock state serializes"))
    }

    fn restore(&mut self, state: &Value) -> Result<(), DriverError> {
        self.state = serde_json::from_value(state.clone()).map_err(|e| DriverError(format!("bad mock state: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> MockFixture {
        MockFixture::parse(
            r##"{"pages": {
                "a": {"url": "https://x/a", "elements": {"#go": {"click": {"goto": "b", "setFlag": "f"}}, "#in": {"fillable": true}}},
                "b": {"url": "https://x/b", "elements": {"#dl": {"requiresFlag": "f", "readyAfterChecks": 2, "download": "data"}}}
            }}"##,
        )
        .unwrap()
    }

    #[test]
    fn page_graph_walk() {
        let mut d = MockDriver::new(fixture());
        assert!(d.click("#go").is_err());
        d.navigate("https://x/a").unwrap();
        d.fill("#in", "hello").unwrap();
        assert!(d.fill("#go", "x").is_err());
        d.click("#go").unwrap();
        assert_eq!(d.current_page(), Some("b"));
        assert!(d.fetch_download("#dl").is_err());
        assert!(!d.exists("#dl").unwrap());
        assert!(!d.exists("#dl").unwrap());
        assert!(d.exists("#dl").unwrap());
        assert_eq!(d.fetch_download("#dl").unwrap(), b"data");
        assert_eq!(d.filled()["#in"], "hello");
        assert_eq!(d.call_log().len(), 10);
    }

    #[test]
    fn snapshot_restores_progress() {
        let mut d = MockDriver::new(fixture());
        d.navigate("https://x/a").unwrap();
        d.click("#go").unwrap();
        d.exists("#dl").unwrap();
        d.exists("#dl").unwrap();
        let mut fresh = MockDriver::new(fixture());
        fresh.restore(&d.snapshot().unwrap()).unwrap();
        assert!(fresh.exists("#dl").unwrap());
        assert_eq!(fresh.call_log(), &[DriverCall::Exists { selector: "#dl".into() }]);
    }

    #[test]
    fn dangling_goto_rejected() {
        let err = MockFixture::parse(r##"{"pages": {"a": {"url": "u", "elements": {"#x": {"click": {"goto": "nowhere"}}}}}}"##);
        assert!(matches!(err, Err(DsarError::Fixture(_))));
    }
}
