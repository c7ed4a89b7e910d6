use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;

use transparency_core::tilt::{self, TiltDocument};
use transparency_hub::{parse_filter, HubError, Store};

fn fixture(name: &str) -> TiltDocument {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tilt").join(name);
    tilt::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn bump(doc: &TiltDocument, version: u64, name: &str) -> TiltDocument {
    let mut d = doc.clone();
    d.meta.version = version;
    d.meta.hash.clear();
    d.controller.name = name.to_string();
    d.sealed()
}

#[test]
fn put_then_get_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let doc = fixture("complete.tilt");
    let etag = store.put(doc.clone()).unwrap();
    assert_eq!(etag, doc.meta.hash);
    let record = store.fetch("green-mail", None).unwrap();
    assert_eq!(record.doc, doc);
    assert_eq!(record.etag, etag);
}

#[test]
fn versions_must_increase() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let doc = fixture("minimal.tilt");
    store.put(doc.clone()).unwrap();
    let err = store.put(doc.clone()).unwrap_err();
    assert!(matches!(err, HubError::VersionConflict { stored: 1, got: 1, .. }), "{err}");
    store.put(bump(&doc, 3, "ACME AG")).unwrap();
    assert_eq!(store.put(bump(&doc, 2, "x")).unwrap_err().name(), "VersionConflictError");
    assert_eq!(store.versions("acme-shop").unwrap(), [1, 3]);
}

#[test]
fn history_is_kept() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let v1 = fixture("minimal.tilt");
    let v2 = bump(&v1, 2, "ACME Holding GmbH");
    store.put(v1.clone()).unwrap();
    store.put(v2.clone()).unwrap();
    assert_eq!(store.fetch("acme-shop", None).unwrap().doc, v2);
    assert_eq!(store.fetch("acme-shop", Some(1)).unwrap().doc, v1);
    assert_eq!(store.fetch("acme-shop", Some(7)).unwrap_err().name(), "NotFoundError");
    assert_eq!(store.fetch("nobody", None).unwrap_err().name(), "NotFoundError");
}

#[test]
fn hash_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let mut doc = fixture("minimal.tilt");
    doc.controller.name = "Changed after hashing".into();
    assert_eq!(store.put(doc).unwrap_err().name(), "ValidationError");
}

#[test]
fn reopening_restores_everything() {
    let dir = tempfile::tempdir().unwrap();
    let v1 = fixture("minimal.tilt");
    {
        let store = Store::open(dir.path()).unwrap();
        store.put(v1.clone()).unwrap();
        store.put(bump(&v1, 2, "ACME Holding GmbH")).unwrap();
        store.put(fixture("streamly.tilt")).unwrap();
    }
    // leftovers of an interrupted write are discarded
    fs::write(dir.path().join("documents/acme-shop/.v3.tilt.tmp"), "{half").unwrap();
    fs::remove_file(dir.path().join("documents/index.json")).unwrap();

    let store = Store::open(dir.path()).unwrap();
    assert_eq!(store.ids(), ["acme-shop", "streamly"]);
    assert_eq!(store.versions("acme-shop").unwrap(), [1, 2]);
    assert_eq!(store.fetch("acme-shop", Some(1)).unwrap().doc, v1);
    assert!(!dir.path().join("documents/acme-shop/.v3.tilt.tmp").exists());
    let index: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("documents/index.json")).unwrap()).unwrap();
    assert_eq!(index["acme-shop"], serde_json::json!([1, 2]));
}

#[test]
fn delete_removes_all_versions() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let v1 = fixture("minimal.tilt");
    store.put(v1.clone()).unwrap();
    store.put(bump(&v1, 2, "B")).unwrap();
    store.delete("acme-shop").unwrap();
    assert_eq!(store.fetch("acme-shop", None).unwrap_err().name(), "NotFoundError");
    assert_eq!(store.delete("acme-shop").unwrap_err().name(), "NotFoundError");
    drop(store);
    let store = Store::open(dir.path()).unwrap();
    assert!(store.ids().is_empty());
    // an id can start over after deletion
    store.put(v1).unwrap();
}

#[test]
fn parallel_writers_on_distinct_and_shared_ids() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let base = fixture("minimal.tilt");
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let store = store.clone();
            let base = base.clone();
            thread::spawn(move || {
                let mut conflicts = 0;
                for v in 1..=10 {
                    let mut own = bump(&base, v, &format!("writer {t}"));
                    own.meta.id = format!("doc-{t}");
                    store.put(own.sealed()).unwrap();
                    // all threads race on the shared id; each version lands once
                    if store.put(bump(&base, v, &format!("writer {t}"))).is_err() {
                        conflicts += 1;
                    }
                }
                conflicts
            })
        })
        .collect();
    let conflicts: usize = handles.into_iter().map(|h| h.join().unwrap()).sum();
    for t in 0..8 {
        assert_eq!(store.versions(&format!("doc-{t}")).unwrap(), (1..=10).collect::<Vec<_>>());
    }
    let shared = store.versions("acme-shop").unwrap();
    assert!(shared.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(shared.len() + conflicts, 80);
}

#[test]
fn adm_filter_over_fixtures_finds_the_single_user() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    for f in ["bakery.tilt", "complete.tilt", "minimal.tilt", "streamly.tilt"] {
        store.put(fixture(f)).unwrap();
    }
    let hits = store.query(&parse_filter("automatedDecisionMaking/inUse eq true").unwrap());
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].id, "streamly");
    assert_eq!(hits[0].matched_paths, ["automatedDecisionMaking/inUse"]);

    let all: Vec<String> = store.query(&parse_filter("").unwrap()).into_iter().map(|h| h.id).collect();
    assert_eq!(all, ["acme-shop", "green-mail", "kiez-baeckerei", "streamly"]);

    let hits = store.query(&parse_filter(r#"thirdCountryTransfers/country eq "IN" && meta/version gte 1"#).unwrap());
    assert_eq!(hits[0].matched_paths, ["meta/version", "thirdCountryTransfers/1/country"]);

    assert_eq!(parse_filter(r#"controller/country gte "DE""#).unwrap_err().name(), "BadFilterError");
}
