//! Field-level diffs over the canonical JSON tree.
//!
//! Arrays are compared index by index. `meta/hash` and `meta/modified` are
//! not compared.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{canonicalize, from_value, to_value, TiltDocument, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffOp {
    Added,
    Removed,
    Changed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub path: String,
    pub op: DiffOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentDiff {
    pub entries: Vec<DiffEntry>,
}

impl DocumentDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("ConflictError at {path}: value does not match the diff")]
    Conflict { path: String },
    #[error("PathError at {path}: no such field")]
    Path { path: String },
    #[error("patched document is invalid: {0}")]
    Invalid(#[from] ValidationError),
}

impl DiffError {
    pub fn name(&self) -> &'static str {
        match self {
            DiffError::Conflict { .. } => "ConflictError",
            DiffError::Path { .. } => "PathError",
            DiffError::Invalid(_) => "ValidationError",
        }
    }
}

fn comparable(doc: &TiltDocument) -> Value {
    let mut v = to_value(doc);
    if let Some(meta) = v.get_mut("meta").and_then(Value::as_object_mut) {
        meta.remove("hash");
        meta.remove("modified");
    }
    v
}

pub fn diff(old: &TiltDocument, new: &TiltDocument) -> DocumentDiff {
    let mut entries = Vec::new();
    walk(&comparable(old), &comparable(new), &mut Vec::new(), &mut entries);
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    DocumentDiff { entries }
}

fn join(path: &[String], last: &str) -> String {
    let mut p = path.join("/");
    if !p.is_empty() {
        p.push('/');
    }
    p.push_str(last);
    p
}

fn walk(old: &Value, new: &Value, path: &mut Vec<String>, out: &mut Vec<DiffEntry>) {
    match (old, new) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, va) in a {
                match b.get(k) {
                    Some(vb) => {
                        path.push(k.clone());
                        walk(va, vb, path, out);
                        path.pop();
                    }
                    None => out.push(DiffEntry { path: join(path, k), op: DiffOp::Removed, before: Some(va.clone()), after: None }),
                }
            }
            for (k, vb) in b {
                if !a.contains_key(k) {
                    out.push(DiffEntry { path: join(path, k), op: DiffOp::Added, before: None, after: Some(vb.clone()) });
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for i in 0..a.len().max(b.len()) {
                let key = i.to_string();
                match (a.get(i), b.get(i)) {
                    (Some(va), Some(vb)) => {
                        path.push(key);
                        walk(va, vb, path, out);
                        path.pop();
                    }
                    (Some(va), None) => out.push(DiffEntry { path: join(path, &key), op: DiffOp::Removed, before: Some(va.clone()), after: None }),
                    (None, Some(vb)) => out.push(DiffEntry { path: join(path, &key), op: DiffOp::Added, before: None, after: Some(vb.clone()) }),
                    (None, None) => unreachable!(),
                }
            }
        }
        _ if old != new => out.push(DiffEntry {
            path: path.join("/"),
            op: DiffOp::Changed,
            before: Some(old.clone()),
            after: Some(new.clone()),
        }),
        _ => {}
    }
}

/// Segment-wise path order with numeric comparison of array indices.
fn path_order(a: &str, b: &str) -> Ordering {
    let mut xs = a.split('/');
    let mut ys = b.split('/');
    loop {
        match (xs.next(), ys.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<usize>(), y.parse::<usize>()) {
                    (Ok(m), Ok(n)) => m.cmp(&n),
                    _ => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

fn split(path: &str) -> (&str, &str) {
    match path.rfind('/') {
        Some(i) => (&path[..i], &path[i + 1..]),
        None => ("", path),
    }
}

fn lookup_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    if path.is_empty() {
        return Some(root);
    }
    path.split('/').try_fold(root, |v, seg| match v {
        Value::Object(m) => m.get_mut(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(move |i| a.get_mut(i)),
        _ => None,
    })
}

fn check_before(current: &Value, entry: &DiffEntry) -> Result<(), DiffError> {
    match &entry.before {
        Some(b) if b == current => Ok(()),
        _ => Err(DiffError::Conflict { path: entry.path.clone() }),
    }
}

/// Applies `delta` to `old`. Changes are applied first, then removals from
/// the deepest/highest index down, then additions in ascending order.
pub fn apply_diff(old: &TiltDocument, delta: &DocumentDiff) -> Result<TiltDocument, DiffError> {
    let mut root = to_value(old);
    let path_err = |e: &DiffEntry| DiffError::Path { path: e.path.clone() };

    for e in delta.entries.iter().filter(|e| e.op == DiffOp::Changed) {
        let slot = lookup_mut(&mut root, &e.path).ok_or_else(|| path_err(e))?;
        check_before(slot, e)?;
        *slot = e.after.clone().ok_or_else(|| DiffError::Conflict { path: e.path.clone() })?;
    }

    let mut removals: Vec<_> = delta.entries.iter().filter(|e| e.op == DiffOp::Removed).collect();
    removals.sort_by(|a, b| path_order(&b.path, &a.path));
    for e in removals {
        let (parent, key) = split(&e.path);
        let container = lookup_mut(&mut root, parent).ok_or_else(|| path_err(e))?;
        match container {
            Value::Object(m) => {
                let current = m.get(key).ok_or_else(|| path_err(e))?;
                check_before(current, e)?;
                m.remove(key);
            }
            Value::Array(a) => {
                let i = key.parse::<usize>().ok().filter(|&i| i < a.len()).ok_or_else(|| path_err(e))?;
                check_before(&a[i], e)?;
                a.remove(i);
            }
            _ => return Err(path_err(e)),
        }
    }

    let mut additions: Vec<_> = delta.entries.iter().filter(|e| e.op == DiffOp::Added).collect();
    additions.sort_by(|a, b| path_order(&a.path, &b.path));
    for e in additions {
        let value = e.after.clone().ok_or_else(|| DiffError::Conflict { path: e.path.clone() })?;
        let (parent, key) = split(&e.path);
        let container = lookup_mut(&mut root, parent).ok_or_else(|| path_err(e))?;
        match container {
            Value::Object(m) => {
                if m.contains_key(key) {
                    return Err(DiffError::Conflict { path: e.path.clone() });
                }
                m.insert(key.to_string(), value);
            }
            Value::Array(a) => {
                let i = key.parse::<usize>().ok().filter(|&i| i <= a.len()).ok_or_else(|| path_err(e))?;
                a.insert(i, value);
            }
            _ => return Err(path_err(e)),
        }
    }

    finish(root)
}

/// Re-validates a patched tree. `modified` is carried over from the old
/// document and raised to `created` when the patch moved `created` past it.
fn finish(mut root: Value) -> Result<TiltDocument, DiffError> {
    if let Some(meta) = root.get_mut("meta").and_then(Value::as_object_mut) {
        meta.insert("hash".into(), Value::String(String::new()));
        let created = meta.get("created").and_then(Value::as_str).and_then(|s| chrono::DateTime::parse_from_rfc3339(s).ok());
        let modified = meta.get("modified").and_then(Value::as_str).and_then(|s| chrono::DateTime::parse_from_rfc3339(s).ok());
        if let (Some(c), Some(m)) = (created, modified) {
            if m < c {
                let created = meta["created"].clone();
                meta.insert("modified".into(), created);
            }
        }
    }
    Ok(from_value(root)?)
}

/// Equality of content, ignoring `meta.hash` and `meta.modified`.
pub fn same_content(a: &TiltDocument, b: &TiltDocument) -> bool {
    let strip = |d: &TiltDocument| {
        let mut d = d.clone();
        d.meta.modified = d.meta.created;
        canonicalize(&d)
    };
    strip(a) == strip(b)
}
