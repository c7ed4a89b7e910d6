//! Score a document against external signals and print the label and card.
//!
//!     cargo run -p transparency-core --example privacy_score

use std::fs;

use transparency_core::score::{compute_score, summarize, SignalsFile};
use transparency_core::tilt;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/tilt/streamly.tilt");
    let doc = tilt::parse(&fs::read_to_string(path).unwrap()).unwrap();
    let signals = SignalsFile::parse(
        r#"{
            "streamly.example": {"trackerCount": 6, "tosdrGrade": "D", "privacySpyScore": 4.5},
            "green-mail.example": {"tosdrGrade": "A"}
        }"#,
    )
    .unwrap();
    let s = signals.lookup("www.streamly.example").cloned().unwrap_or_default();

    let report = compute_score(&doc, &s);
    println!("{}: {} {:?} (raw {})", doc.controller.name, report.score, report.label, report.raw_score);
    for item in &report.breakdown {
        println!("  {:<11}{:+}", item.code, item.points);
    }
    println!("{}", serde_json::to_string_pretty(&summarize(&doc, &s)).unwrap());
}
