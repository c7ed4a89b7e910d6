//! Parse a document, list warnings and print its canonical form and hash.
//!
//!     cargo run -p transparency-core --example validate_document [FILE]

use std::{env, fs};

use transparency_core::tilt;

fn main() {
    let path = env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/tilt/streamly.tilt").into());
    let text = fs::read_to_string(&path).expect("readable document");
    let doc = match tilt::parse(&text) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("{} v{} ({})", doc.meta.name, doc.meta.version, doc.meta.language);
    println!("hash      {}", doc.meta.hash);
    for w in tilt::warnings(&doc) {
        println!("warning   {}: {}", w.path, w.message);
    }
    let canonical = tilt::canonicalize(&doc);
    println!("canonical {} bytes, starts {}", canonical.len(), &canonical[..canonical.len().min(60)]);

    // a broken field is reported with its path
    let mut broken = doc.clone();
    broken.controller.country = "Germany".into();
    broken.meta.hash.clear();
    for e in tilt::validation_errors(&broken) {
        println!("invalid   {e}");
    }
}
