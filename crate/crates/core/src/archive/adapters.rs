use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use once_cell::sync::Lazy;
use serde::Deserialize;
use serde_json::{Map, Value};

use super::RecordKind;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct KindKeyword {
    keyword: String,
    kind: RecordKind,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ServiceSignature {
    name: String,
    signature: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub(super) struct Adapters {
    kind_keywords: Vec<KindKeyword>,
    record_array_keys: Vec<String>,
    timestamp_fields: Vec<String>,
    services: Vec<ServiceSignature>,
}

pub(super) static ADAPTERS: Lazy<Adapters> =
    Lazy::new(|| serde_json::from_str(include_str!("../../data/archive_adapters.json")).expect("bundled adapter table"));

/// How a file's records were read.
pub(super) enum Records {
    /// Not a structured format; counts as zero records.
    Unstructured,
    Parsed(Vec<Value>),
}

impl Adapters {
    /// Keyword match on the file name first, then on the whole path.
    pub fn kind_of(&self, relative_path: &str) -> RecordKind {
        let lower = relative_path.to_lowercase();
        let name = lower.rsplit('/').next().unwrap_or(&lower);
        for haystack in [name, lower.as_str()] {
            if let Some(k) = self.kind_keywords.iter().find(|k| haystack.contains(&k.keyword)) {
                return k.kind;
            }
        }
        RecordKind::Other
    }

    /// A service whose every signature fragment occurs in some path.
    pub fn detect_service(&self, relative_paths: &[String]) -> Option<String> {
        self.services
            .iter()
            .find(|s| s.signature.iter().all(|sig| relative_paths.iter().any(|p| p.to_lowercase().contains(sig.as_str()))))
            .map(|s| s.name.clone())
    }

    /// Reads a file into records. Errors never quote the file's contents.
    pub fn read_records(&self, path: &Path) -> Result<Records, String> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
        match ext.as_str() {
            "json" => {
                let bytes = fs::read(path).map_err(|e| e.kind().to_string())?;
                let value: Value = serde_json::from_slice(&bytes)
                    .map_err(|e| format!("not valid JSON (line {}, column {})", e.line(), e.column()))?;
                Ok(Records::Parsed(self.unwrap_json(value)))
            }
            "jsonl" | "ndjson" => {
                let text = fs::read(path).map_err(|e| e.kind().to_string())?;
                let text = String::from_utf8(text).map_err(|e| format!("not valid UTF-8 (byte {})", e.utf8_error().valid_up_to()))?;
                let mut out = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let v = serde_json::from_str(line)
                        .map_err(|e| format!("not valid JSON lines (line {}, column {})", i + 1, e.column()))?;
                    out.push(v);
                }
                Ok(Records::Parsed(out))
            }
            "csv" => {
                let mut reader = csv::ReaderBuilder::new().from_path(path).map_err(|e| format!("cannot open CSV: {}", csv_kind(&e)))?;
                let headers = reader.headers().map_err(|e| format!("not valid CSV: {}", csv_kind(&e)))?.clone();
                let mut out = Vec::new();
                for row in reader.records() {
                    let row = row.map_err(|e| format!("not valid CSV: {}", csv_kind(&e)))?;
                    let obj: Map<String, Value> =
                        headers.iter().zip(row.iter()).map(|(h, v)| (h.to_string(), Value::String(v.to_string()))).collect();
                    out.push(Value::Object(obj));
                }
                Ok(Records::Parsed(out))
            }
            _ => Ok(Records::Unstructured),
        }
    }

    fn unwrap_json(&self, value: Value) -> Vec<Value> {
        match value {
            Value::Array(items) => items,
            Value::Object(mut obj) => {
                let key = self.record_array_keys.iter().find(|k| obj.get(k.as_str()).is_some_and(Value::is_array));
                match key {
                    Some(k) => match obj.remove(k.as_str()) {
                        Some(Value::Array(items)) => items,
                        _ => unreachable!(),
                    },
                    None => vec![Value::Object(obj)],
                }
            }
            other => vec![other],
        }
    }

    /// First recognised timestamp field of a record.
    pub fn timestamp_of(&self, record: &Value) -> Option<DateTime<Utc>> {
        let obj = record.as_object()?;
        self.timestamp_fields.iter().filter_map(|f| obj.get(f.as_str())).find_map(parse_timestamp)
    }
}

/// Position-only description of a CSV error.
fn csv_kind(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, expected_len, len } => format!(
            "row at line {} has {len} fields, expected {expected_len}",
            pos.as_ref().map(|p| p.line()).unwrap_or(0)
        ),
        csv::ErrorKind::Utf8 { pos, .. } => {
            format!("invalid UTF-8 at line {}", pos.as_ref().map(|p| p.line()).unwrap_or(0))
        }
        csv::ErrorKind::Io(io) => io.kind().to_string(),
        _ => "unreadable".to_string(),
    }
}

const MAX_EPOCH: f64 = 253_402_300_799.0; // 9999-12-31T23:59:59Z

fn from_epoch(secs: f64) -> Option<DateTime<Utc>> {
    if !secs.is_finite() || !(0.0..=MAX_EPOCH).contains(&secs) {
        return None;
    }
    Utc.timestamp_opt(secs.trunc() as i64, 0).single()
}

/// Epoch seconds (number or numeric string), RFC 3339, or
/// `YYYY-MM-DD HH:MM:SS UTC`.
pub(super) fn parse_timestamp(value: &Value) -> Option<DateTime<Utc>> {
    match value {
        Value::Number(n) => from_epoch(n.as_f64()?),
        Value::String(s) => {
            let s = s.trim();
            if let Ok(secs) = s.parse::<f64>() {
                return from_epoch(secs);
            }
            if let Ok(t) = DateTime::parse_from_rfc3339(s) {
                return Some(t.with_timezone(&Utc));
            }
            let bare = s.strip_suffix(" UTC").unwrap_or(s);
            NaiveDateTime::parse_from_str(bare, "%Y-%m-%d %H:%M:%S").ok().map(|t| t.and_utc())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn kinds_by_keyword() {
        let a = &*ADAPTERS;
        assert_eq!(a.kind_of("messages.csv"), RecordKind::Messages);
        assert_eq!(a.kind_of("comments.csv"), RecordKind::Posts);
        assert_eq!(a.kind_of("your_posts_1.json"), RecordKind::Posts);
        assert_eq!(a.kind_of("account_information.json"), RecordKind::Profile);
        assert_eq!(a.kind_of("logins.json"), RecordKind::Activity);
        assert_eq!(a.kind_of("messages/inbox/jane_1/message_1.json"), RecordKind::Messages);
        assert_eq!(a.kind_of("messages/inbox/jane_1/photo.jpg"), RecordKind::Messages);
        assert_eq!(a.kind_of("misc/readme.txt"), RecordKind::Other);
    }

    #[test]
    fn timestamps() {
        let t = |v: Value| parse_timestamp(&v).map(|d| d.to_rfc3339());
        assert_eq!(t(json!(1551657600)).unwrap(), "2019-03-04T00:00:00+00:00");
        assert_eq!(t(json!("1551657600.5")).unwrap(), "2019-03-04T00:00:00+00:00");
        assert_eq!(t(json!("2019-03-04T01:00:00+01:00")).unwrap(), "2019-03-04T00:00:00+00:00");
        assert_eq!(t(json!("2019-03-04 00:00:00 UTC")).unwrap(), "2019-03-04T00:00:00+00:00");
        assert_eq!(t(json!(-5)), None);
        assert_eq!(t(json!("yesterday")), None);
        assert_eq!(t(json!(true)), None);
    }

    #[test]
    fn record_arrays_unwrap() {
        let a = &*ADAPTERS;
        assert_eq!(a.unwrap_json(json!([1, 2, 3])).len(), 3);
        assert_eq!(a.unwrap_json(json!({"participants": [1], "messages": [1, 2]})).len(), 2);
        assert_eq!(a.unwrap_json(json!({"name": "x"})).len(), 1);
    }

    #[test]
    fn first_timestamp_field_wins() {
        let a = &*ADAPTERS;
        let r = json!({"date": "2020-01-01T00:00:00Z", "created_utc": "1551657600"});
        assert_eq!(a.timestamp_of(&r).unwrap().to_rfc3339(), "2019-03-04T00:00:00+00:00");
        let r = json!({"created_utc": "n/a", "date": "2020-01-01T00:00:00Z"});
        assert_eq!(a.timestamp_of(&r).unwrap().to_rfc3339(), "2020-01-01T00:00:00+00:00");
    }
}
