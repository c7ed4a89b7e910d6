//! Store several documents and versions on disk, then query them.
//!
//!     cargo run -p transparency-hub --example document_store

use std::fs;

use transparency_core::tilt::{self, TiltDocument};
use transparency_hub::{parse_filter, Store};

fn fixture(name: &str) -> TiltDocument {
    let path = format!("{}/../../fixtures/tilt/{name}", env!("CARGO_MANIFEST_DIR"));
    tilt::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    for name in ["bakery.tilt", "complete.tilt", "minimal.tilt", "streamly.tilt"] {
        let etag = store.put(fixture(name)).unwrap();
        println!("put {name:<14} etag {}", &etag[..12]);
    }

    // a second version of one document
    let mut next = store.fetch("streamly", None).unwrap().doc.clone();
    next.meta.version += 1;
    next.meta.hash.clear();
    next.controller.name = "Streamly Europe B.V.".into();
    store.put(next.sealed()).unwrap();
    println!("streamly versions {:?}", store.versions("streamly").unwrap());

    // stale versions are rejected
    if let Err(e) = store.put(fixture("streamly.tilt")) {
        println!("{e}");
    }

    for filter in [
        "automatedDecisionMaking/inUse eq true",
        "thirdCountryTransfers/country exists",
        r#"controller/country eq "DE" && dataDisclosed/category contains "mail""#,
        r#"meta/language neq "en""#,
    ] {
        let hits = store.query(&parse_filter(filter).unwrap());
        println!("{filter}");
        for h in hits {
            println!("  {} v{} {:?}", h.id, h.version, h.matched_paths);
        }
    }

    // a reopened store sees the same data
    let reopened = Store::open(dir.path()).unwrap();
    println!("reopened ids {:?}", reopened.ids());
}
