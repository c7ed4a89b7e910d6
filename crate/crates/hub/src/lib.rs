//! Versioned store and REST service for transparency documents.
//!
//! [`Store`] keeps every version of every document on disk, one canonical
//! file per version, and answers [`filter`] queries by scanning the latest
//! versions. [`qa`] produces template answers with the field paths they were
//! built from. [`server`] exposes all of it, plus the annotation workflow,
//! over HTTP.

pub mod filter;
pub mod qa;
pub mod server;
mod store;
#[cfg(feature = "testing")]
pub mod testing;

use thiserror::Error;
use transparency_core::annotation::AnnotationError;
use transparency_core::tilt::{DiffError, ParseError, ValidationError};

pub use filter::{parse_filter, Conjunct, FilterExpr, FilterOp, QueryHit};
pub use qa::{answer_question, Answer, Intent, IntentKind};
pub use server::{router, serve, ServerConfig};
pub use store::{Store, StoreRecord};

#[derive(Debug, Error)]
pub enum HubError {
    #[error("NotFoundError: {0}")]
    NotFound(String),
    #[error("VersionConflictError: {id} is at version {stored}, got {got}")]
    VersionConflict { id: String, stored: u64, got: u64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("ConflictError: {0}")]
    Conflict(String),
    #[error("BadFilterError: {0}")]
    BadFilter(String),
    #[error("UnknownCategoryError: no data category {0:?}")]
    UnknownCategory(String),
    #[error("InvalidIntentError: {0}")]
    InvalidIntent(String),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("IoError: {0}")]
    Io(String),
}

impl HubError {
    pub fn name(&self) -> &'static str {
        match self {
            HubError::NotFound(_) => "NotFoundError",
            HubError::VersionConflict { .. } => "VersionConflictError",
            HubError::Parse(e) => e.name(),
            HubError::Validation(_) => "ValidationError",
            HubError::Conflict(_) => "ConflictError",
            HubError::BadFilter(_) => "BadFilterError",
            HubError::UnknownCategory(_) => "UnknownCategoryError",
            HubError::InvalidIntent(_) => "InvalidIntentError",
            HubError::Annotation(e) => e.name(),
            HubError::Diff(e) => e.name(),
            HubError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for HubError {
    fn from(e: std::io::Error) -> Self {
        HubError::Io(e.to_string())
    }
}
