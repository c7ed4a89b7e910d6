//! Machine-readable data-subject access requests.
//!
//! A [`DsarDescriptor`] lists the steps of an access request for one
//! service. [`execute`] runs them in order against a [`SiteDriver`],
//! producing a resumable [`DsarSession`]. Identity values go to `Fill`
//! steps only, and downloads are written only below the caller's artifact
//! directory.

mod descriptor;
mod driver;
mod engine;
mod mock;
mod registry;

use thiserror::Error;

pub use descriptor::{validate_descriptor, Condition, DsarDescriptor, IdentityField, Step, ValueRef, FORMAT_VERSION};
pub use driver::{DriverCall, DriverError, SiteDriver};
pub use engine::{
    execute, Artifact, Clock, DsarSession, ExecuteOptions, Failure, Identity, SessionStatus, SystemClock, VirtualClock,
    CONDITION_NOT_MET,
};
pub use mock::{ClickEffect, Element, MockDriver, MockFixture, Page};
pub use registry::{parse_registry, registry_lookup, Difficulty, RegistryRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsarError {
    #[error("SyntaxError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("DescriptorError{}: {message}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Descriptor { step: Option<usize>, message: String },
    #[error("ResumeMismatchError: session belongs to descriptor {got}, not {expected}")]
    ResumeMismatch { expected: String, got: String },
    #[error("RegistryError: {0}")]
    Registry(String),
    #[error("FixtureError: {0}")]
    Fixture(String),
}

impl DsarError {
    pub fn name(&self) -> &'static str {
        match self {
            DsarError::Syntax { .. } => "SyntaxError",
            DsarError::Descriptor { .. } => "DescriptorError",
            DsarError::ResumeMismatch { .. } => "ResumeMismatchError",
            DsarError::Registry(_) => "RegistryError",
            DsarError::Fixture(_) => "FixtureError",
        }
    }
}
