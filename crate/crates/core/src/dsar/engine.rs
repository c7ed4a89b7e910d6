use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::descriptor::{DsarDescriptor, IdentityField, Step, ValueRef};
use super::driver::{DriverError, SiteDriver};
use super::DsarError;

/// Seconds-resolution clock used for waits and polls.
pub trait Clock {
    fn now(&self) -> u64;
    fn sleep(&mut self, seconds: u64);
}

/// A clock that only moves when the engine sleeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VirtualClock {
    now: u64,
}

impl VirtualClock {
    pub fn at(now: u64) -> Self {
        Self { now }
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> u64 {
        self.now
    }

    fn sleep(&mut self, seconds: u64) {
        self.now += seconds;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    start: std::time::Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { start: std::time::Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        self.start.elapsed().as_secs()
    }

    fn sleep(&mut self, seconds: u64) {
        std::thread::sleep(Duration::from_secs(seconds));
    }
}

/// Values substituted into `Fill` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Identity {
    #[serde(rename = "EMAIL")]
    pub email: String,
    #[serde(rename = "FULL_NAME")]
    pub full_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Pending,
    Running,
    Waiting,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Artifact {
    pub name: String,
    pub byte_length: u64,
    pub local_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Failure {
    pub step_index: usize,
    pub reason: String,
}

/// Execution state of one descriptor; serializes to JSON for resuming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DsarSession {
    pub descriptor: DsarDescriptor,
    pub descriptor_hash: String,
    pub step_index: usize,
    pub status: SessionStatus,
    pub artifacts: Vec<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver_state: Option<Value>,
}

impl DsarSession {
    pub fn new(descriptor: &DsarDescriptor) -> Self {
        Self {
            descriptor: descriptor.clone(),
            descriptor_hash: descriptor.content_hash(),
            step_index: 0,
            status: SessionStatus::Pending,
            artifacts: Vec::new(),
            failure: None,
            driver_state: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecuteOptions {
    /// Downloads are written below this directory and nowhere else.
    pub artifact_dir: PathBuf,
    /// Total seconds this call may spend sleeping. When a wait would exceed
    /// it, the session stops with status `waiting` and can be resumed.
    pub wait_budget: Option<u64>,
}

impl ExecuteOptions {
    pub fn new(artifact_dir: impl Into<PathBuf>) -> Self {
        Self { artifact_dir: artifact_dir.into(), wait_budget: None }
    }
}

pub const CONDITION_NOT_MET: &str = "condition not met";

enum Outcome {
    Next,
    Pause,
    Fail(String),
}

fn artifact_name(service: &str, index: usize) -> String {
    let slug: String = service
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    format!("{}-step{index}.bin", slug.trim_matches('-'))
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.part"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

struct Run<'a, D: SiteDriver, C: Clock> {
    driver: &'a mut D,
    clock: &'a mut C,
    budget: Option<u64>,
    slept: u64,
}

impl<D: SiteDriver, C: Clock> Run<'_, D, C> {
    /// Sleeps unless that would overrun the wait budget.
    fn sleep(&mut self, seconds: u64) -> bool {
        if self.budget.is_some_and(|b| self.slept + seconds > b) {
            return false;
        }
        self.clock.sleep(seconds);
        self.slept += seconds;
        true
    }

    fn step(&mut self, descriptor: &DsarDescriptor, index: usize, identity: &Identity, options: &ExecuteOptions, session: &mut DsarSession) -> Result<Outcome, DriverError> {
        let outcome = match &descriptor.steps[index] {
            Step::Navigate { url } => {
                self.driver.navigate(url)?;
                Outcome::Next
            }
            Step::Click { selector } => {
                self.driver.click(selector)?;
                Outcome::Next
            }
            Step::Fill { selector, value_ref } => {
                let text = match value_ref {
                    ValueRef::Identity(IdentityField::Email) => identity.email.as_str(),
                    ValueRef::Identity(IdentityField::FullName) => identity.full_name.as_str(),
                    ValueRef::Literal { literal } => literal.as_str(),
                };
                self.driver.fill(selector, text)?;
                Outcome::Next
            }
            Step::WaitFor { timeout_seconds, .. } => {
                let selector = descriptor.condition_selector(index).expect("checked descriptor");
                let started = self.clock.now();
                loop {
                    if self.driver.exists(selector)? {
                        break Outcome::Next;
                    }
                    let waited = self.clock.now() - started;
                    if waited >= *timeout_seconds {
                        break Outcome::Fail(CONDITION_NOT_MET.to_string());
                    }
                    if !self.sleep(1.min(timeout_seconds - waited)) {
                        break Outcome::Pause;
                    }
                }
            }
            Step::Poll { interval_seconds, max_attempts, .. } => {
                let selector = descriptor.condition_selector(index).expect("checked descriptor");
                let mut attempt = 1;
                loop {
                    if self.driver.exists(selector)? {
                        break Outcome::Next;
                    }
                    if attempt == *max_attempts {
                        break Outcome::Fail(CONDITION_NOT_MET.to_string());
                    }
                    if !self.sleep(*interval_seconds) {
                        break Outcome::Pause;
                    }
                    attempt += 1;
                }
            }
            Step::Download { selector } => {
                let bytes = self.driver.fetch_download(selector)?;
                let name = artifact_name(&descriptor.service, index);
                match write_artifact(&options.artifact_dir, &name, &bytes) {
                    Ok(local_path) => {
                        session.artifacts.push(Artifact { name, byte_length: bytes.len() as u64, local_path });
                        Outcome::Next
                    }
                    Err(e) => Outcome::Fail(format!("cannot store artifact: {e}")),
                }
            }
        };
        Ok(outcome)
    }
}

/// Runs `descriptor` from the start, or from where `resume` stopped.
///
/// Driver failures and unmet conditions end up in the returned session
/// (`status: failed`); only a resume for a different descriptor is an error.
pub fn execute<D: SiteDriver, C: Clock>(
    descriptor: &DsarDescriptor,
    driver: &mut D,
    identity: &Identity,
    clock: &mut C,
    options: &ExecuteOptions,
    resume: Option<DsarSession>,
) -> Result<DsarSession, DsarError> {
    descriptor.check()?;
    let mut session = match resume {
        Some(s) => {
            let expected = descriptor.content_hash();
            if s.descriptor_hash != expected || s.descriptor.content_hash() != expected {
                return Err(DsarError::ResumeMismatch { expected, got: s.descriptor_hash });
            }
            s
        }
        None => DsarSession::new(descriptor),
    };
    if session.status == SessionStatus::Done {
        return Ok(session);
    }
    if let Some(state) = &session.driver_state {
        if let Err(e) = driver.restore(state) {
            session.status = SessionStatus::Failed;
            session.failure = Some(Failure { step_index: session.step_index, reason: e.to_string() });
            return Ok(session);
        }
    }
    session.status = SessionStatus::Running;
    session.failure = None;

    let mut run = Run { driver, clock, budget: options.wait_budget, slept: 0 };
    while session.step_index < descriptor.steps.len() {
        let index = session.step_index;
        match run.step(descriptor, index, identity, options, &mut session) {
            Ok(Outcome::Next) => session.step_index += 1,
            Ok(Outcome::Pause) => {
                session.status = SessionStatus::Waiting;
                break;
            }
            Ok(Outcome::Fail(reason)) => {
                session.status = SessionStatus::Failed;
                session.failure = Some(Failure { step_index: index, reason });
                break;
            }
            Err(e) => {
                session.status = SessionStatus::Failed;
                session.failure = Some(Failure { step_index: index, reason: e.to_string() });
                break;
            }
        }
    }
    if session.step_index == descriptor.steps.len() {
        session.status = SessionStatus::Done;
    }
    session.driver_state = run.driver.snapshot();
    Ok(session)
}
