use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("DriverError: {0}")]
pub struct DriverError(pub String);

/// One call the engine made on a driver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "call", rename_all = "camelCase")]
pub enum DriverCall {
    Navigate { url: String },
    Exists { selector: String },
    Click { selector: String },
    Fill { selector: String, text: String },
    FetchDownload { selector: String },
}

/// The site the engine drives. Selectors are opaque to the engine.
pub trait SiteDriver {
    fn navigate(&mut self, url: &str) -> Result<(), DriverError>;
    fn exists(&mut self, selector: &str) -> Result<bool, DriverError>;
    fn click(&mut self, selector: &str) -> Result<(), DriverError>;
    fn fill(&mut self, selector: &str, text: &str) -> Result<(), DriverError>;
    fn fetch_download(&mut self, selector: &str) -> Result<Vec<u8>, DriverError>;

    /// Every call made on this driver instance, in order.
    fn call_log(&self) -> &[DriverCall];

    /// Opaque driver state stored in a paused session.
    fn snapshot(&self) -> Option<Value> {
        None
    }

    fn restore(&mut self, _state: &Value) -> Result<(), DriverError> {
        Ok(())
    }
}
