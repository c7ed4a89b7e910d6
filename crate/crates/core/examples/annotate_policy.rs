//! Annotate a privacy policy question by question, then export a document.
//!
//!     cargo run -p transparency-core --example annotate_policy

use std::fs;

use chrono::Utc;
use transparency_core::annotation::{create_task, export_tilt, suggest, ExportSeed, FieldKey, NextQuestion, PolicyText, Submission};
use transparency_core::tilt;

/// Character offsets of `needle` in `body`.
fn span(body: &str, needle: &str) -> (usize, usize) {
    let start = body[..body.find(needle).expect("needle in policy")].chars().count();
    (start, start + needle.chars().count())
}

fn main() {
    let body = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/policies/acme_de.txt")).unwrap();
    let policy = PolicyText::new("acme-policy", None, body).unwrap();
    let mut task = create_task("acme-task", &policy).unwrap();

    let answers: &[(FieldKey, &[&str])] = &[
        (FieldKey::ControllerIdentity, &["Verantwortlicher:\nACME GmbH\nHauptstraße 1\n10115 Berlin, Deutschland"]),
        (FieldKey::DataCategories, &["E-Mail-Adresse"]),
        (FieldKey::DataPurposes, &["Den Versand des Newsletters stützen wir auf Ihre Einwilligung nach Art. 6 Abs. 1 lit. a DSGVO."]),
        (FieldKey::DataStorage, &["Wir löschen Ihre Daten nach Ende der Vertragsbeziehung."]),
        (FieldKey::Adm, &["Eine automatisierte Entscheidungsfindung findet nicht statt."]),
    ];
    while let NextQuestion::Question { field, prompt, .. } = task.next_question() {
        let hints = suggest(&task, &policy, field).unwrap();
        let needles = answers.iter().find(|(k, _)| *k == field).map_or(&[][..], |(_, n)| n);
        println!("[{:>3.0}%] {prompt} -> {} span(s), {} suggestion(s)", task.progress() * 100.0, needles.len(), hints.len());
        let submission = Submission {
            field,
            present: !needles.is_empty(),
            spans: needles.iter().map(|n| span(&policy.body, n)).collect(),
            annotator: "example".into(),
            at: None,
        };
        task.submit(&policy, submission, Utc::now()).unwrap();
    }

    let seed = ExportSeed { id: "acme".into(), name: "ACME Shop".into(), language: "de".into(), country: "DE".into(), timestamp: None };
    let doc = export_tilt(&task, &seed).unwrap();
    println!("{}", serde_json::to_string_pretty(&tilt::to_value(&doc)).unwrap());
    println!("{} checklist items missing", tilt::check_completeness(&doc).missing_count());
}
