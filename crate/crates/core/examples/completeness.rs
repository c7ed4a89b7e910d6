//! The fourteen-item disclosure checklist for each fixture document.
//!
//!     cargo run -p transparency-core --example completeness

use std::fs;

use transparency_core::tilt::{self, CheckStatus};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/tilt");
    for name in ["complete.tilt", "minimal.tilt", "streamly.tilt", "bakery.tilt"] {
        let doc = tilt::parse(&fs::read_to_string(format!("{dir}/{name}")).unwrap()).unwrap();
        let report = tilt::check_completeness(&doc);
        println!("{name}: {} missing", report.missing_count());
        for item in report.items.iter().filter(|i| i.status == CheckStatus::Missing) {
            let at = item.evidence_path.as_deref().unwrap_or("-");
            println!("  {:?} {} (at {at})", item.key, item.key.description());
        }
    }
}
