use serde_json::Value;
use sha2::{Digest, Sha256};

use super::TiltDocument;

/// Serializes a document into its JSON value tree.
pub fn to_value(doc: &TiltDocument) -> Value {
    serde_json::to_value(doc).expect("document serialization is infallible")
}

/// Canonical text of a document: keys sorted bytewise, no insignificant
/// whitespace, arrays in stored order, `meta.hash` blanked.
pub fn canonicalize(doc: &TiltDocument) -> String {
    let mut value = to_value(doc);
    value["meta"]["hash"] = Value::String(String::new());
    canonical_json(&value)
}

/// Lowercase hex SHA-256 of the canonical bytes.
pub fn content_hash(doc: &TiltDocument) -> String {
    hex::encode(Sha256::digest(canonicalize(doc).as_bytes()))
}

/// Compact sorted-key serialization including the stored `meta.hash`.
pub fn to_json_with_hash(doc: &TiltDocument) -> String {
    canonical_json(&to_value(doc))
}

/// Writes any JSON value in canonical form.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push('{');
            for (i, (k, v)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(k, out);
                out.push(':');
                write_value(v, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(v, out);
            }
            out.push(']');
        }
        Value::String(s) => write_string(s, out),
        // serde_json prints integers without leading zeros or exponent
        other => out.push_str(&other.to_string()),
    }
}

fn write_string(s: &str, out: &mut String) {
    out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorts_keys_and_strips_whitespace() {
        let v = json!({"b": [3, {"z": 1, "a": "ä"}], "a": true, "B": null});
        assert_eq!(canonical_json(&v), r#"{"B":null,"a":true,"b":[3,{"a":"ä","z":1}]}"#);
    }

    #[test]
    fn escapes_control_characters() {
        assert_eq!(canonical_json(&json!("a\"b\\\n")), r#""a\"b\\\n""#);
    }
}
