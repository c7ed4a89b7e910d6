//! Test oracles: a brute-force query scan, filter generators and a
//! soundness check for template answers.
//!
//! [`scan`] evaluates a filter over fully flattened documents without
//! sharing any code with [`crate::filter`].

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::Value;
use transparency_core::testing;
use transparency_core::tilt::{self, to_value, TiltDocument};

use crate::qa::{self, answer_traced, Interpolation, Source};
use crate::{answer_question, Conjunct, FilterExpr, FilterOp, Intent, IntentKind, QueryHit};

#[derive(Debug, Clone, PartialEq)]
pub enum Seg {
    Key(String),
    Index(usize),
}

/// One document as a list of every (path, node) pair below the root.
#[derive(Debug, Clone)]
pub struct ScanDoc {
    pub id: String,
    pub version: u64,
    pub nodes: Vec<(Vec<Seg>, Value)>,
}

fn flatten(v: &Value, path: &mut Vec<Seg>, out: &mut Vec<(Vec<Seg>, Value)>) {
    if !path.is_empty() {
        out.push((path.clone(), v.clone()));
    }
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                path.push(Seg::Key(k.clone()));
                flatten(child, path, out);
                path.pop();
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                path.push(Seg::Index(i));
                flatten(child, path, out);
                path.pop();
            }
        }
        _ => {}
    }
}

pub fn scan_doc(doc: &TiltDocument) -> ScanDoc {
    let mut nodes = Vec::new();
    flatten(&to_value(doc), &mut Vec::new(), &mut nodes);
    ScanDoc { id: doc.meta.id.clone(), version: doc.meta.version, nodes }
}

/// A pattern addresses a concrete path if the concrete path is the pattern
/// with list indexes inserted.
fn addresses(pattern: &[&str], concrete: &[Seg]) -> bool {
    match concrete.split_first() {
        None => pattern.is_empty(),
        Some((Seg::Index(i), rest)) => {
            (pattern.first() == Some(&i.to_string().as_str()) && addresses(&pattern[1..], rest)) || addresses(pattern, rest)
        }
        Some((Seg::Key(k), rest)) => pattern.first() == Some(&k.as_str()) && addresses(&pattern[1..], rest),
    }
}

fn render(path: &[Seg]) -> String {
    path.iter()
        .map(|s| match s {
            Seg::Key(k) => k.clone(),
            Seg::Index(i) => i.to_string(),
        })
        .collect::<Vec<_>>()
        .join("/")
}

fn scalar_eq(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

fn scan_conjunct(c: &Conjunct, nodes: &[(Vec<Seg>, Value)]) -> Option<Vec<String>> {
    let pattern: Vec<&str> = c.path.split('/').collect();
    let candidates: Vec<&(Vec<Seg>, Value)> = nodes.iter().filter(|(p, v)| !v.is_array() && addresses(&pattern, p)).collect();
    let v = c.value.as_ref();
    let sat = |f: &dyn Fn(&Value) -> bool| -> Vec<String> { candidates.iter().filter(|(_, n)| f(n)).map(|(p, _)| render(p)).collect() };
    let nonempty = |w: Vec<String>| (!w.is_empty()).then_some(w);
    match c.op {
        FilterOp::Eq => nonempty(sat(&|n| scalar_eq(n, v.unwrap()))),
        FilterOp::Neq => sat(&|n| scalar_eq(n, v.unwrap())).is_empty().then(Vec::new),
        FilterOp::Contains => nonempty(sat(&|n| matches!((n, v), (Value::String(s), Some(Value::String(t))) if s.contains(t.as_str())))),
        FilterOp::Gte => nonempty(sat(&|n| n.as_f64().is_some_and(|x| x >= v.unwrap().as_f64().unwrap()))),
        FilterOp::Lte => nonempty(sat(&|n| n.as_f64().is_some_and(|x| x <= v.unwrap().as_f64().unwrap()))),
        FilterOp::Exists => {
            let present = !candidates.is_empty();
            if v.and_then(Value::as_bool).unwrap_or(true) {
                present.then(|| sat(&|_| true))
            } else {
                (!present).then(Vec::new)
            }
        }
    }
}

/// Expected query result, sorted by id.
pub fn scan(filter: &FilterExpr, docs: &[ScanDoc]) -> Vec<QueryHit> {
    let mut hits = Vec::new();
    'docs: for d in docs {
        let mut paths = Vec::new();
        for c in &filter.conjuncts {
            match scan_conjunct(c, &d.nodes) {
                Some(p) => paths.extend(p),
                None => continue 'docs,
            }
        }
        paths.sort();
        paths.dedup();
        hits.push(QueryHit { id: d.id.clone(), version: d.version, matched_paths: paths });
    }
    hits.sort_by(|a, b| a.id.cmp(&b.id));
    hits
}

/// `n` generated documents with ids `doc-00`, `doc-01`, ..., the same on
/// every call.
pub fn corpus(n: usize) -> Vec<TiltDocument> {
    let mut runner = TestRunner::deterministic();
    let strategy = testing::document();
    (0..n)
        .map(|i| {
            let mut doc = strategy.new_tree(&mut runner).unwrap().current();
            doc.meta.id = format!("doc-{i:02}");
            doc.meta.hash.clear();
            doc.sealed()
        })
        .collect()
}

/// Paths and values seen in a corpus, from which filters are drawn.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub patterns: Vec<String>,
    pub strings: Vec<String>,
    pub numbers: Vec<f64>,
    /// (generic path, scalar) pairs
    pub leaves: Vec<(String, Value)>,
}

impl Vocabulary {
    pub fn of(docs: &[ScanDoc]) -> Self {
        let mut patterns = BTreeSet::new();
        let mut strings = BTreeSet::new();
        let mut numbers = Vec::new();
        let mut leaves = BTreeSet::new();
        for (i, d) in docs.iter().enumerate() {
            for (path, value) in &d.nodes {
                let generic: Vec<&str> = path.iter().filter_map(|s| if let Seg::Key(k) = s { Some(k.as_str()) } else { None }).collect();
                patterns.insert(generic.join("/"));
                if !value.is_array() && !value.is_object() {
                    leaves.insert((generic.join("/"), value.to_string()));
                }
                if i % 10 == 0 {
                    patterns.insert(render(path));
                }
                match value {
                    Value::String(s) => {
                        strings.insert(s.clone());
                    }
                    Value::Number(n) => numbers.push(n.as_f64().unwrap()),
                    _ => {}
                }
            }
        }
        patterns.extend(["nope".to_string(), "meta/nope".to_string(), "controller/name/deeper".to_string()]);
        numbers.extend([0.0, -1.0, 2.5, 1e9]);
        Self {
            patterns: patterns.into_iter().collect(),
            strings: strings.into_iter().collect(),
            numbers,
            leaves: leaves.into_iter().map(|(p, v)| (p, serde_json::from_str(&v).unwrap())).collect(),
        }
    }

    /// Mostly (path, value) pairs taken from the corpus, so that many
    /// filters split it; the rest are arbitrary combinations.
    pub fn conjunct(&self) -> impl Strategy<Value = Conjunct> {
        let path = prop::sample::select(self.patterns.clone());
        let string = prop_oneof![
            prop::sample::select(self.strings.clone()),
            (prop::sample::select(self.strings.clone()), 0usize..4, 0usize..4).prop_map(|(s, a, b)| {
                let chars: Vec<char> = s.chars().collect();
                let start = a.min(chars.len());
                let end = chars.len().saturating_sub(b).max(start);
                chars[start..end].iter().collect()
            }),
            "[a-z]{1,3}",
        ];
        let number = prop::sample::select(self.numbers.clone());
        let scalar = prop_oneof![string.clone().prop_map(Value::from), number.clone().prop_map(Value::from), any::<bool>().prop_map(Value::from),];
        let leaf = prop::sample::select(self.leaves.clone());
        let numeric_leaf = prop::sample::select(self.leaves.iter().filter(|(_, v)| v.is_number()).cloned().collect::<Vec<_>>());
        let string_leaf = prop::sample::select(self.leaves.iter().filter(|(_, v)| v.is_string()).cloned().collect::<Vec<_>>());
        let op = |op: FilterOp| move |(path, value): (String, Value)| Conjunct { path, op, value: Some(value) };
        prop_oneof![
            3 => leaf.clone().prop_map(op(FilterOp::Eq)),
            2 => leaf.prop_map(op(FilterOp::Neq)),
            2 => (string_leaf, 0usize..3).prop_map(|((p, v), cut)| {
                let s: String = v.as_str().unwrap().chars().skip(cut).collect();
                Conjunct { path: p, op: FilterOp::Contains, value: Some(s.into()) }
            }),
            2 => numeric_leaf.clone().prop_map(op(FilterOp::Gte)),
            2 => numeric_leaf.prop_map(op(FilterOp::Lte)),
            1 => (path.clone(), scalar.clone()).prop_map(op(FilterOp::Eq)),
            1 => (path.clone(), scalar).prop_map(op(FilterOp::Neq)),
            1 => (path.clone(), string).prop_map(|(p, s)| Conjunct { path: p, op: FilterOp::Contains, value: Some(s.into()) }),
            1 => (path.clone(), number.clone()).prop_map(|(p, n)| Conjunct { path: p, op: FilterOp::Gte, value: Some(n.into()) }),
            1 => (path.clone(), number).prop_map(|(p, n)| Conjunct { path: p, op: FilterOp::Lte, value: Some(n.into()) }),
            2 => (path, prop::option::of(any::<bool>())).prop_map(|(p, b)| Conjunct { path: p, op: FilterOp::Exists, value: b.map(Value::from) }),
        ]
    }

    /// Conjunctions of zero to two conjuncts.
    pub fn filter(&self) -> impl Strategy<Value = FilterExpr> {
        prop::collection::vec(self.conjunct(), 0..3).prop_map(|conjuncts| FilterExpr { conjuncts })
    }
}

fn lookup<'v>(v: &'v Value, path: &str) -> Option<&'v Value> {
    path.split('/').try_fold(v, |node, seg| match node {
        Value::Object(m) => m.get(seg),
        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

/// Every intent the document supports, plus one unknown category.
fn intents(doc: &TiltDocument) -> Vec<Intent> {
    let mut out = vec![
        Intent::new(IntentKind::ControllerIdentity),
        Intent::new(IntentKind::ThirdCountryTransfers),
        Intent::new(IntentKind::AdmInUse),
        Intent::new(IntentKind::RightsSummary),
    ];
    for d in &doc.data_disclosed {
        out.push(Intent::for_category(IntentKind::PurposesForCategory, d.category.clone()));
        out.push(Intent::for_category(IntentKind::RetentionForCategory, d.category.clone()));
    }
    out
}

/// Checks one interpolation against the document tree.
fn traces_to_document(tree: &Value, lang: &str, slot: &Interpolation) -> Result<(), String> {
    let found = lookup(tree, &slot.path);
    let ok = match &slot.source {
        Source::Value => match found {
            Some(Value::String(s)) => *s == slot.text,
            Some(Value::Number(n)) => n.to_string() == slot.text,
            _ => false,
        },
        Source::Count => found.and_then(Value::as_array).is_some_and(|a| a.len().to_string() == slot.text),
        Source::Flag { word } => {
            let flag = found.and_then(Value::as_bool);
            let consistent = match word.as_str() {
                "yes" => flag == Some(true),
                "no" => flag == Some(false),
                right => flag == Some(true) && slot.path == format!("rights/{right}/available"),
            };
            consistent && slot.text == qa::word(lang, word)
        }
        Source::Missing => {
            matches!(found, None) || found.and_then(Value::as_str).is_some_and(|s| s.trim().is_empty())
        }
        Source::Empty => match found {
            Some(Value::Array(a)) => a.is_empty(),
            Some(Value::Object(m)) if slot.path == "rights" => {
                m.values().all(|r| r.get("available") != Some(&Value::Bool(true)))
            }
            _ => false,
        },
    };
    let word_ok = match &slot.source {
        Source::Missing => slot.text == qa::word(lang, "unknown"),
        Source::Empty => slot.text == qa::word(lang, "none"),
        _ => true,
    };
    if ok && word_ok {
        Ok(())
    } else {
        Err(format!("{slot:?} does not trace to {found:?}"))
    }
}

/// Checks every intent the document supports: answers are identical across
/// runs and serialization, the text is exactly the filled template, and every
/// interpolated value is listed as evidence and traces to the document.
pub fn check_answers(doc: &TiltDocument) -> Result<(), String> {
    let tree = to_value(doc);
    let lang = doc.meta.language.as_str();
    for intent in intents(doc) {
        let (answer, slots) = answer_traced(doc, &intent).map_err(|e| e.to_string())?;
        // determinism, also across a serialization round trip
        let reparsed = tilt::parse(&serde_json::to_string(doc).unwrap()).unwrap();
        if answer_question(&reparsed, &intent).map_err(|e| e.to_string())? != answer {
            return Err(format!("{intent:?}: answers differ between runs"));
        }
        let mut expected = qa::template(lang, intent.kind).to_string();
        let mut names: Vec<&str> = slots.iter().map(|s| s.placeholder.as_str()).collect();
        names.dedup();
        for name in names {
            let joined: Vec<&str> = slots.iter().filter(|s| s.placeholder == name).map(|s| s.text.as_str()).collect();
            expected = expected.replace(&format!("{{{name}}}"), &joined.join(qa::word(lang, "separator")));
        }
        if expected.contains('{') || expected != answer.answer_text {
            return Err(format!("{intent:?}: text {:?} is not the filled template {expected:?}", answer.answer_text));
        }
        for slot in &slots {
            if !answer.evidence_paths.contains(&slot.path) {
                return Err(format!("{intent:?}: {} not listed as evidence", slot.path));
            }
            traces_to_document(&tree, lang, slot)?;
        }
        for path in &answer.evidence_paths {
            let parent = path.rsplit_once('/').map_or("", |(p, _)| p);
            if lookup(&tree, path).is_none() && !parent.is_empty() && lookup(&tree, parent).is_none() && !slots.iter().any(|s| &s.path == path) {
                return Err(format!("{intent:?}: evidence {path} was never readable"));
            }
        }
    }
    Ok(())
}
