//! Answer the fixed question templates against each fixture document.
//!
//!     cargo run -p transparency-hub --example ask_questions

use std::fs;

use transparency_core::tilt;
use transparency_hub::{answer_question, Intent, IntentKind};

fn main() {
    for name in ["bakery.tilt", "streamly.tilt"] {
        let path = format!("{}/../../fixtures/tilt/{name}", env!("CARGO_MANIFEST_DIR"));
        let doc = tilt::parse(&fs::read_to_string(path).unwrap()).unwrap();
        println!("{} ({})", doc.controller.name, doc.meta.language);
        let category = doc.data_disclosed.first().map(|d| d.category.clone()).unwrap_or_default();
        for kind in IntentKind::ALL {
            let intent = if kind.needs_category() { Intent::for_category(kind, &category) } else { Intent::new(kind) };
            match answer_question(&doc, &intent) {
                Ok(a) => println!("  {:?}\n    {}\n    evidence {:?}", kind, a.answer_text, a.evidence_paths),
                Err(e) => println!("  {kind:?}: {e}"),
            }
        }
        if let Err(e) = answer_question(&doc, &Intent::for_category(IntentKind::RetentionForCategory, "shoe size")) {
            println!("  {e}");
        }
    }
}
