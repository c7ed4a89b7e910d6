//! Diff two versions of a document and patch the old one forward.
//!
//!     cargo run -p transparency-core --example diff_versions

use std::fs;

use transparency_core::tilt::{self, ThirdCountryTransfer};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/tilt/bakery.tilt");
    let v2 = tilt::parse(&fs::read_to_string(path).unwrap()).unwrap();

    let mut v3 = v2.clone();
    v3.meta.version += 1;
    v3.meta.hash.clear();
    v3.third_country_transfers.push(ThirdCountryTransfer { country: "US".into(), adequacy_decision: false, safeguards: Some("standard contractual clauses".into()) });
    v3.controller.name = format!("{} KG", v3.controller.name);
    let v3 = v3.sealed();

    let delta = tilt::diff(&v2, &v3);
    for e in &delta.entries {
        println!("{:?} {}", e.op, e.path);
    }
    let patched = tilt::apply_diff(&v2, &delta).unwrap();
    assert!(tilt::same_content(&patched, &v3));
    assert!(tilt::diff(&v3, &v3).is_empty());
    println!("patched hash {}", patched.meta.hash);
}
