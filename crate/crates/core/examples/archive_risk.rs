//! Profile a data-export archive and compute its shareable risk factor.
//!
//!     cargo run -p transparency-core --example archive_risk [DIR]

use std::path::PathBuf;

use transparency_core::archive::{self, RecordKind};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/archives/facebook")));
    let manifest = archive::ingest(&dir, None).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    for f in &manifest.files {
        println!("{:<40} {:<9} {}", f.relative_path, f.kind.to_string(), f.record_count);
    }
    let profile = archive::profile(&manifest).unwrap();
    for kind in RecordKind::ALL {
        println!("{:<9} {}", kind.to_string(), profile.count(kind));
    }
    println!("months    {:?}", profile.monthly_histogram);
    println!("{}", serde_json::to_string(&archive::scoreboard_entry(&profile)).unwrap());
}
