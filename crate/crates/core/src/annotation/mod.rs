//! Step-by-step annotation of privacy-policy text.
//!
//! A task walks the annotator through a fixed question queue, one field
//! group at a time, grouped by aspect (controller, data categories,
//! transfers, rights, automated decisions). Answers carry character-offset
//! spans into the policy body; a finished task exports to a
//! [`TiltDocument`](crate::tilt::TiltDocument).

mod export;
mod fields;
mod suggest;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tilt::ValidationError;

pub use export::{export_tilt, ExportSeed};
pub use fields::{field_spec, FieldKey, FieldSpec};
pub use suggest::{sentences, suggest, Suggestion};

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("EmptyPolicyError: policy body is empty")]
    EmptyPolicy,
    #[error("OutOfOrderError: expected answer for {expected}, got {got}")]
    OutOfOrder { expected: String, got: String },
    #[error("SpanBoundsError: span [{start}, {end}) outside policy of length {length}")]
    SpanBounds { start: usize, end: usize, length: usize },
    #[error("MissingSpanError: a present answer needs at least one span")]
    MissingSpan,
    #[error("UnknownFieldError: {0}")]
    UnknownField(String),
    #[error("TaskNotDoneError: {answered} of {total} questions answered")]
    TaskNotDone { answered: usize, total: usize },
    #[error("PolicyMismatchError: task belongs to policy {expected}, got {got}")]
    PolicyMismatch { expected: String, got: String },
    #[error("InvalidSeedError: {0}")]
    InvalidSeed(ValidationError),
}

impl AnnotationError {
    pub fn name(&self) -> &'static str {
        match self {
            AnnotationError::EmptyPolicy => "EmptyPolicyError",
            AnnotationError::OutOfOrder { .. } => "OutOfOrderError",
            AnnotationError::SpanBounds { .. } => "SpanBoundsError",
            AnnotationError::MissingSpan => "MissingSpanError",
            AnnotationError::UnknownField(_) => "UnknownFieldError",
            AnnotationError::TaskNotDone { .. } => "TaskNotDoneError",
            AnnotationError::PolicyMismatch { .. } => "PolicyMismatchError",
            AnnotationError::InvalidSeed(_) => "InvalidSeedError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicyText {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    pub body: String,
    /// Number of characters (Unicode scalar values) in `body`.
    pub length: usize,
}

impl PolicyText {
    pub fn new(id: impl Into<String>, source_url: Option<String>, body: impl Into<String>) -> Result<Self, AnnotationError> {
        let body = body.into();
        if body.trim().is_empty() {
            return Err(AnnotationError::EmptyPolicy);
        }
        Ok(Self { id: id.into(), source_url, length: body.chars().count(), body })
    }

    /// Characters `[start, end)` of the body.
    pub fn excerpt(&self, start: usize, end: usize) -> String {
        self.body.chars().skip(start).take(end.saturating_sub(start)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Open,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub field: FieldKey,
    pub span_start: usize,
    pub span_end: usize,
    pub excerpt: String,
    pub annotator: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationTask {
    pub id: String,
    pub policy_id: String,
    pub question_queue: Vec<FieldKey>,
    pub cursor: usize,
    pub answers: BTreeMap<FieldKey, Answer>,
    pub annotations: Vec<Annotation>,
    pub status: TaskStatus,
}

/// What an annotator submits for the current question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Submission {
    pub field: FieldKey,
    pub present: bool,
    /// Half-open `[start, end)` character offsets.
    #[serde(default)]
    pub spans: Vec<(usize, usize)>,
    #[serde(default = "anonymous")]
    pub annotator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<DateTime<Utc>>,
}

fn anonymous() -> String {
    "anonymous".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum NextQuestion {
    Question { field: FieldKey, prompt: String, position: usize, total: usize },
    Done,
}

/// Starts a task over `policy` with the full question queue.
pub fn create_task(id: impl Into<String>, policy: &PolicyText) -> Result<AnnotationTask, AnnotationError> {
    if policy.body.trim().is_empty() {
        return Err(AnnotationError::EmptyPolicy);
    }
    Ok(AnnotationTask {
        id: id.into(),
        policy_id: policy.id.clone(),
        question_queue: FieldKey::ALL.to_vec(),
        cursor: 0,
        answers: BTreeMap::new(),
        annotations: Vec::new(),
        status: TaskStatus::Open,
    })
}

impl AnnotationTask {
    pub fn next_question(&self) -> NextQuestion {
        match self.question_queue.get(self.cursor) {
            Some(&field) => NextQuestion::Question {
                field,
                prompt: field_spec(field).prompt.clone(),
                position: self.cursor,
                total: self.question_queue.len(),
            },
            None => NextQuestion::Done,
        }
    }

    pub fn progress(&self) -> f64 {
        if self.question_queue.is_empty() {
            1.0
        } else {
            self.cursor as f64 / self.question_queue.len() as f64
        }
    }

    pub fn is_done(&self) -> bool {
        self.status == TaskStatus::Done
    }

    /// Records the answer to the current question and advances the cursor.
    /// Nothing changes when the submission is rejected. Spans of a negative
    /// answer are ignored.
    pub fn submit(&mut self, policy: &PolicyText, submission: Submission, now: DateTime<Utc>) -> Result<(), AnnotationError> {
        if policy.id != self.policy_id {
            return Err(AnnotationError::PolicyMismatch { expected: self.policy_id.clone(), got: policy.id.clone() });
        }
        let expected = self.question_queue.get(self.cursor).copied();
        if expected != Some(submission.field) {
            return Err(AnnotationError::OutOfOrder {
                expected: expected.map_or_else(|| "nothing (task is done)".to_string(), |f| f.to_string()),
                got: submission.field.to_string(),
            });
        }
        if submission.present {
            if submission.spans.is_empty() {
                return Err(AnnotationError::MissingSpan);
            }
            for &(start, end) in &submission.spans {
                if start >= end || end > policy.length {
                    return Err(AnnotationError::SpanBounds { start, end, length: policy.length });
                }
            }
        }

        let at = submission.at.unwrap_or(now);
        let field = submission.field;
        // last writer wins per field
        self.annotations.retain(|a| a.field != field);
        if submission.present {
            for (start, end) in submission.spans {
                self.annotations.push(Annotation {
                    field,
                    span_start: start,
                    span_end: end,
                    excerpt: policy.excerpt(start, end),
                    annotator: submission.annotator.clone(),
                    at,
                });
            }
        }
        self.answers.insert(field, Answer { present: submission.present });
        self.cursor += 1;
        if self.cursor == self.question_queue.len() {
            self.status = TaskStatus::Done;
        }
        Ok(())
    }

    pub fn annotations_for(&self, field: FieldKey) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(move |a| a.field == field)
    }
}
