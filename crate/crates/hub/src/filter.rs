//! Conjunctive filters over document fields.
//!
//! ```text
//! filter   := "" | conjunct ("&&" conjunct)*
//! conjunct := path op [value]
//! op       := eq | neq | exists | contains | gte | lte
//! value    := number | true | false | "JSON string literal"
//! ```
//!
//! Paths are slash-separated field names as in the serialized document. A
//! name segment applied to a list applies to every element, and a path
//! ending at a list stands for its elements, so
//! `dataDisclosed/recipients/country eq "US"` holds when any recipient of
//! any category is in the US. Numeric segments index lists.
//!
//! `eq`, `contains`, `gte` and `lte` hold if some addressed value
//! satisfies them; `neq` is the negation of `eq`; `exists` (or
//! `exists true`) holds if the path addresses anything, `exists false` if
//! it does not. `contains` is a substring test on strings; `gte` and `lte`
//! compare numbers and need a numeric operand.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::HubError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterOp {
    Eq,
    Neq,
    Exists,
    Contains,
    Gte,
    Lte,
}

impl FilterOp {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "eq" => FilterOp::Eq,
            "neq" => FilterOp::Neq,
            "exists" => FilterOp::Exists,
            "contains" => FilterOp::Contains,
            "gte" => FilterOp::Gte,
            "lte" => FilterOp::Lte,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FilterOp::Eq => "eq",
            FilterOp::Neq => "neq",
            FilterOp::Exists => "exists",
            FilterOp::Contains => "contains",
            FilterOp::Gte => "gte",
            FilterOp::Lte => "lte",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjunct {
    pub path: String,
    pub op: FilterOp,
    /// A scalar: string, number or boolean. `None` only for `exists`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterExpr {
    pub conjuncts: Vec<Conjunct>,
}

/// A document matched by a query, with the paths of the values that
/// satisfied `eq`, `contains`, `gte`, `lte` and `exists`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryHit {
    pub id: String,
    pub version: u64,
    pub matched_paths: Vec<String>,
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.path, self.op.as_str())?;
        if let Some(v) = &self.value {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conjuncts.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" && "))
    }
}

impl Conjunct {
    /// Checks the path/op/value combination.
    pub fn check(&self) -> Result<(), HubError> {
        let bad = |m: &str| Err(HubError::BadFilter(format!("{self}: {m}")));
        if self.path.is_empty() || self.path.split('/').any(str::is_empty) {
            return bad("path segments must not be empty");
        }
        match (self.op, &self.value) {
            (FilterOp::Exists, None | Some(Value::Bool(_))) => Ok(()),
            (FilterOp::Exists, Some(_)) => bad("exists takes true or false"),
            (_, None) => bad("operator needs a value"),
            (FilterOp::Gte | FilterOp::Lte, Some(Value::Number(_))) => Ok(()),
            (FilterOp::Gte | FilterOp::Lte, Some(_)) => bad("gte and lte need a numeric value"),
            (FilterOp::Contains, Some(Value::String(_))) => Ok(()),
            (FilterOp::Contains, Some(_)) => bad("contains needs a string value"),
            (FilterOp::Eq | FilterOp::Neq, Some(Value::String(_) | Value::Number(_) | Value::Bool(_))) => Ok(()),
            (FilterOp::Eq | FilterOp::Neq, Some(_)) => bad("value must be a scalar"),
        }
    }
}

impl FilterExpr {
    pub fn check(&self) -> Result<(), HubError> {
        self.conjuncts.iter().try_for_each(Conjunct::check)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn peek_and(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with("&&")
    }

    /// A run of characters up to whitespace or `&&`.
    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut end = rest.len();
        for (i, c) in rest.char_indices() {
            if c.is_whitespace() || rest[i..].starts_with("&&") {
                end = i;
                break;
            }
        }
        self.pos += end;
        &rest[..end]
    }

    /// A JSON string literal.
    fn quoted(&mut self) -> Result<String, String> {
        let mut stream = serde_json::Deserializer::from_str(&self.src[self.pos..]).into_iter::<String>();
        match stream.next() {
            Some(Ok(s)) => {
                self.pos += stream.byte_offset();
                Ok(s)
            }
            _ => Err("malformed string literal".into()),
        }
    }

    fn value(&mut self) -> Result<Value, String> {
        self.skip_ws();
        if self.src[self.pos..].starts_with('"') {
            return self.quoted().map(Value::String);
        }
        let w = self.word();
        match w {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => {
                let n: f64 = w.parse().map_err(|_| format!("{w:?} is not a number, boolean or quoted string"))?;
                serde_json::Number::from_f64(n).map(Value::Number).ok_or_else(|| format!("{w:?} is not finite"))
            }
        }
    }
}

/// Parses the filter string grammar. The empty string is the empty
/// conjunction and matches everything.
pub fn parse_filter(input: &str) -> Result<FilterExpr, HubError> {
    let mut lx = Lexer { src: input, pos: 0 };
    let mut conjuncts = Vec::new();
    let bad = |m: String| HubError::BadFilter(m);
    if lx.at_end() {
        return Ok(FilterExpr { conjuncts });
    }
    loop {
        let path = lx.word().to_string();
        if path.is_empty() {
            return Err(bad(format!("expected a path at offset {}", lx.pos)));
        }
        let op_word = lx.word();
        let op = FilterOp::parse(op_word).ok_or_else(|| bad(format!("unknown operator {op_word:?} after {path}")))?;
        let value = if op == FilterOp::Exists && (lx.at_end() || lx.peek_and()) {
            None
        } else {
            Some(lx.value().map_err(|m| bad(format!("{path} {}: {m}", op.as_str())))?)
        };
        let conjunct = Conjunct { path, op, value };
        conjunct.check()?;
        conjuncts.push(conjunct);
        if lx.at_end() {
            break;
        }
        if !lx.peek_and() {
            return Err(bad(format!("expected && at offset {}", lx.pos)));
        }
        lx.pos += 2;
    }
    Ok(FilterExpr { conjuncts })
}

fn resolve<'v>(node: &'v Value, segments: &[&str], here: String, out: &mut Vec<(String, &'v Value)>) {
    let join = |seg: &dyn fmt::Display| if here.is_empty() { seg.to_string() } else { format!("{here}/{seg}") };
    match (segments.split_first(), node) {
        (None, Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                out.push((join(&i), item));
            }
        }
        (None, _) => out.push((here, node)),
        (Some((seg, rest)), Value::Object(map)) => {
            if let Some(child) = map.get(*seg) {
                resolve(child, rest, join(seg), out);
            }
        }
        (Some((seg, rest)), Value::Array(items)) => match seg.parse::<usize>() {
            Ok(i) => {
                if let Some(child) = items.get(i) {
                    resolve(child, rest, join(&i), out);
                }
            }
            Err(_) => {
                for (i, item) in items.iter().enumerate() {
                    resolve(item, segments, join(&i), out);
                }
            }
        },
        (Some(_), _) => {}
    }
}

fn number_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        _ => a == b,
    }
}

/// Paths satisfying one conjunct, or `None` if the conjunct fails.
fn conjunct_matches(c: &Conjunct, doc: &Value) -> Option<Vec<String>> {
    let segments: Vec<&str> = c.path.split('/').collect();
    let mut nodes = Vec::new();
    resolve(doc, &segments, String::new(), &mut nodes);
    let witnesses = |pred: &dyn Fn(&Value) -> bool| -> Vec<String> {
        nodes.iter().filter(|(_, v)| pred(v)).map(|(p, _)| p.clone()).collect()
    };
    let value = c.value.as_ref();
    let hit = |w: Vec<String>| if w.is_empty() { None } else { Some(w) };
    match c.op {
        FilterOp::Eq => hit(witnesses(&|v| number_eq(v, value.unwrap()))),
        FilterOp::Neq => witnesses(&|v| number_eq(v, value.unwrap())).is_empty().then(Vec::new),
        FilterOp::Contains => {
            let needle = value.and_then(Value::as_str).unwrap_or_default();
            hit(witnesses(&|v| v.as_str().is_some_and(|s| s.contains(needle))))
        }
        FilterOp::Gte | FilterOp::Lte => {
            let bound = value.and_then(Value::as_f64).unwrap_or(f64::NAN);
            let gte = c.op == FilterOp::Gte;
            hit(witnesses(&|v| v.as_f64().is_some_and(|x| if gte { x >= bound } else { x <= bound })))
        }
        FilterOp::Exists => {
            let want = value.and_then(Value::as_bool).unwrap_or(true);
            match (want, nodes.is_empty()) {
                (true, false) => Some(nodes.iter().map(|(p, _)| p.clone()).collect()),
                (false, true) => Some(Vec::new()),
                _ => None,
            }
        }
    }
}

/// Evaluates a checked filter against a document's JSON tree. Returns the
/// sorted witness paths when every conjunct holds.
pub fn evaluate(filter: &FilterExpr, doc: &Value) -> Option<Vec<String>> {
    let mut paths = BTreeSet::new();
    for c in &filter.conjuncts {
        paths.extend(conjunct_matches(c, doc)?);
    }
    Some(paths.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc() -> Value {
        json!({
            "meta": {"id": "a", "version": 3},
            "dataDisclosed": [
                {"category": "email", "recipients": [{"country": "DE"}, {"country": "US"}]},
                {"category": "orders", "recipients": []}
            ],
            "sources": ["https://a.example/privacy"],
            "automatedDecisionMaking": {"inUse": true}
        })
    }

    fn eval(f: &str) -> Option<Vec<String>> {
        evaluate(&parse_filter(f).unwrap(), &doc())
    }

    #[test]
    fn grammar() {
        let f = parse_filter(r#"meta/version gte 2 && controller/name eq "A \"B\" && C" && dpo exists&&x exists false"#).unwrap();
        assert_eq!(f.conjuncts.len(), 4);
        assert_eq!(f.conjuncts[1].value, Some(json!("A \"B\" && C")));
        assert_eq!(f.conjuncts[2].value, None);
        assert_eq!(f.conjuncts[3].value, Some(json!(false)));
        assert_eq!(parse_filter("  ").unwrap().conjuncts.len(), 0);
        assert_eq!(parse_filter(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn malformed_filters() {
        for bad in [
            r#"controller/country gte "DE""#,
            "meta/version lte true",
            "a eq",
            "a like 3",
            "a eq DE",
            r#"a eq "open"#,
            "a eq 1 b eq 2",
            "a eq 1 &&",
            "a//b exists",
            "/a exists",
            "a contains 3",
            "a exists 1",
        ] {
            let err = parse_filter(bad).unwrap_err();
            assert_eq!(err.name(), "BadFilterError", "{bad}");
        }
    }

    #[test]
    fn fan_out_and_witnesses() {
        assert_eq!(eval(r#"dataDisclosed/recipients/country eq "US""#).unwrap(), ["dataDisclosed/0/recipients/1/country"]);
        assert_eq!(eval(r#"dataDisclosed/1/category eq "orders""#).unwrap(), ["dataDisclosed/1/category"]);
        assert!(eval(r#"dataDisclosed/1/category eq "email""#).is_none());
        assert_eq!(eval(r#"sources contains "a.example""#).unwrap(), ["sources/0"]);
        assert_eq!(eval("automatedDecisionMaking/inUse eq true").unwrap(), ["automatedDecisionMaking/inUse"]);
        assert_eq!(eval("meta/version gte 3 && meta/version lte 3.0").unwrap(), ["meta/version"]);
    }

    #[test]
    fn negations_and_existence() {
        assert_eq!(eval(r#"meta/id neq "b""#).unwrap(), Vec::<String>::new());
        assert!(eval(r#"dataDisclosed/category neq "orders""#).is_none());
        assert_eq!(eval("dataDisclosed/1/recipients exists false").unwrap(), Vec::<String>::new());
        assert!(eval("dataDisclosed/0/recipients exists false").is_none());
        assert_eq!(eval("dpo exists false").unwrap(), Vec::<String>::new());
        assert!(eval("dpo exists").is_none());
        assert_eq!(eval("").unwrap(), Vec::<String>::new());
    }
}
