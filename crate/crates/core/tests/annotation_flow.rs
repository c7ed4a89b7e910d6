use std::fs;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use proptest::prelude::*;
use proptest::test_runner::Config;
use transparency_core::annotation::*;
use transparency_core::tilt::{check_completeness, validate, CheckCode, CheckStatus, StorageKind};

fn policy_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/policies").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Character span of the first occurrence of `needle`.
fn span_of(body: &str, needle: &str) -> (usize, usize) {
    let byte = body.find(needle).unwrap_or_else(|| panic!("{needle:?} not in policy"));
    let start = body[..byte].chars().count();
    (start, start + needle.chars().count())
}

fn at() -> DateTime<Utc> {
    "2023-05-04T10:00:00Z".parse().unwrap()
}

fn seed() -> ExportSeed {
    ExportSeed { id: "acme".into(), name: "ACME Shop".into(), language: "de".into(), country: "DE".into(), timestamp: None }
}

fn answer_all(policy: &PolicyText, spans: &[(FieldKey, &[&str])]) -> AnnotationTask {
    let mut task = create_task("task-1", policy).unwrap();
    while let NextQuestion::Question { field, .. } = task.next_question() {
        let needles = spans.iter().find(|(k, _)| *k == field).map(|(_, n)| *n).unwrap_or(&[]);
        let submission = Submission {
            field,
            present: !needles.is_empty(),
            spans: needles.iter().map(|n| span_of(&policy.body, n)).collect(),
            annotator: "alice".into(),
            at: Some(at()),
        };
        task.submit(policy, submission, at()).unwrap();
    }
    task
}

#[test]
fn fully_annotated_policy_exports_a_complete_document() {
    let body = policy_text("acme_de.txt");
    let policy = PolicyText::new("acme-policy", None, body).unwrap();
    let task = answer_all(
        &policy,
        &[
            (FieldKey::ControllerIdentity, &["Verantwortlicher:\nACME GmbH\nHauptstraße 1\n10115 Berlin, Deutschland"]),
            (FieldKey::DpoContact, &["Datenschutzbeauftragte: Erika Muster, dsb@acme.example"]),
            (FieldKey::DataCategories, &["E-Mail-Adresse", "Bestelldaten"]),
            (
                FieldKey::DataPurposes,
                &[
                    "Den Versand des Newsletters stützen wir auf Ihre Einwilligung nach Art. 6 Abs. 1 lit. a DSGVO.",
                    "Zur Betrugsprävention verarbeiten wir Bestelldaten nach Art. 6 Abs. 1 lit. f DSGVO.",
                ],
            ),
            (FieldKey::DataLegalBasis, &["Art. 6 Abs. 1 lit. a DSGVO"]),
            (FieldKey::DataLegitimateInterest, &["Unser berechtigtes Interesse liegt in der Verhinderung von Zahlungsausfällen."]),
            (FieldKey::DataRecipients, &["Empfänger ist der Versanddienstleister Paketblitz GmbH, Deutschland."]),
            (FieldKey::DataStorage, &["Wir löschen Ihre Daten nach Ende der Vertragsbeziehung."]),
            (FieldKey::DataRequirementNote, &["Die Bereitstellung der Bestelldaten ist für den Vertragsschluss erforderlich."]),
            (
                FieldKey::RightsCore,
                &["Sie haben das Recht auf Auskunft, Berichtigung, Löschung, Einschränkung der Verarbeitung, Datenübertragbarkeit und Widerspruch."],
            ),
            (FieldKey::RightsWithdrawConsent, &["Sie können Ihre Einwilligung jederzeit widerrufen."]),
            (
                FieldKey::RightsComplaintAuthority,
                &["Beschwerden richten Sie an die Berliner Beauftragte für Datenschutz, mailbox@datenschutz-berlin.de."],
            ),
            (FieldKey::Adm, &["Eine automatisierte Entscheidungsfindung findet nicht statt."]),
        ],
    );
    assert_eq!(task.status, TaskStatus::Done);
    for a in &task.annotations {
        assert_eq!(policy.excerpt(a.span_start, a.span_end), a.excerpt);
        assert!(task.answers[&a.field].present);
    }

    let doc = export_tilt(&task, &seed()).unwrap();
    assert_eq!(doc.controller.name, "ACME GmbH");
    assert_eq!(doc.controller.address, "Hauptstraße 1, 10115 Berlin, Deutschland");
    assert_eq!(doc.controller.country, "DE");
    assert_eq!(doc.dpo.as_ref().unwrap().email.as_deref(), Some("dsb@acme.example"));
    assert_eq!(doc.data_disclosed.len(), 2);
    let bases: Vec<_> = doc.data_disclosed[0].purposes.iter().map(|p| p.legal_basis.as_str()).collect();
    assert_eq!(bases, ["GDPR-6-1-a", "GDPR-6-1-f"]);
    assert_eq!(doc.data_disclosed[0].storage.as_ref().unwrap().kind, StorageKind::Criterion);
    assert!(!doc.automated_decision_making.as_ref().unwrap().in_use);
    assert_eq!(doc.meta.created, at());
    validate(&doc).unwrap();

    let report = check_completeness(&doc);
    assert_eq!(report.missing().collect::<Vec<_>>(), vec![]);
    assert_eq!(report.status(CheckCode::C06), CheckStatus::Present);
    assert_eq!(report.status(CheckCode::C11), CheckStatus::Present);
}

#[test]
fn controller_only_export() {
    let policy = PolicyText::new("p", None, "Der Verantwortliche ist ACME GmbH, Hauptstr. 1, 10115 Berlin. Sonst nichts.").unwrap();
    let task = answer_all(&policy, &[(FieldKey::ControllerIdentity, &["Der Verantwortliche ist ACME GmbH, Hauptstr. 1, 10115 Berlin."])]);
    let doc = export_tilt(&task, &seed()).unwrap();
    assert_eq!(doc.controller.name, "ACME GmbH");
    assert_eq!(doc.controller.address, "Hauptstr. 1, 10115 Berlin");
    // no country in the excerpt: the seed's country is used
    assert_eq!(doc.controller.country, "DE");
    assert!(doc.data_disclosed.is_empty());
    assert!(doc.third_country_transfers.is_empty());
    // identical to the minimal document: DE controller, no DPO, nothing disclosed
    use CheckCode::*;
    assert_eq!(check_completeness(&doc).missing().collect::<Vec<_>>(), vec![C04, C05, C07, C09, C10, C12]);
}

#[test]
fn open_task_cannot_export() {
    let policy = PolicyText::new("p", None, "Text.").unwrap();
    let task = create_task("t", &policy).unwrap();
    let err = export_tilt(&task, &seed()).unwrap_err();
    assert_eq!(err.name(), "TaskNotDoneError");
}

#[test]
fn invalid_seed_is_rejected() {
    let policy = PolicyText::new("p", None, "Text.").unwrap();
    let task = answer_all(&policy, &[]);
    let mut bad = seed();
    bad.country = "XX".into();
    assert_eq!(export_tilt(&task, &bad).unwrap_err().name(), "InvalidSeedError");
}

#[test]
fn transfers_keep_safeguards_and_skip_eu_countries() {
    let body = "Wir übermitteln Daten in die USA auf Grundlage von Standardvertragsklauseln. Daten gehen auch nach Frankreich. Ein Dienstleister sitzt in Indien.";
    let policy = PolicyText::new("p", None, body).unwrap();
    let task = answer_all(
        &policy,
        &[(
            FieldKey::Transfers,
            &[
                "Wir übermitteln Daten in die USA auf Grundlage von Standardvertragsklauseln.",
                "Daten gehen auch nach Frankreich.",
                "Ein Dienstleister sitzt in Indien.",
            ],
        )],
    );
    let doc = export_tilt(&task, &seed()).unwrap();
    let countries: Vec<_> = doc.third_country_transfers.iter().map(|t| t.country.as_str()).collect();
    assert_eq!(countries, ["US", "IN"]);
    assert!(!doc.third_country_transfers[0].is_unprotected());
    assert!(doc.third_country_transfers[1].is_unprotected());
}

fn arb_policy() -> impl Strategy<Value = PolicyText> {
    let words = prop::sample::select(vec![
        "Verantwortlich", "ist", "ACME", "GmbH", "USA", "Art. 6 Abs. 1 lit. f", "P3Y", "info@x.example", "+49 30 123456",
        "Deutschland", "Indien", "keine automatisierte", "Auskunft", "Löschung", "\n", ",", ".", "ö", "Standardvertragsklauseln",
        "DE", "XX", ":", "  ",
    ]);
    prop::collection::vec(words, 1..60).prop_map(|w| PolicyText::new("p", None, format!("x {}", w.join(" "))).unwrap())
}

proptest! {
    #![proptest_config(Config::with_cases(128))]

    #[test]
    fn every_completed_task_exports_a_valid_document(
        policy in arb_policy(),
        picks in prop::collection::vec((any::<bool>(), prop::collection::vec((0usize..1000, 1usize..80), 1..3)), 15),
    ) {
        let mut task = create_task("t", &policy).unwrap();
        let mut last_cursor = 0;
        for (present, raw) in picks {
            let NextQuestion::Question { field, .. } = task.next_question() else { break };
            let spans = raw
                .into_iter()
                .map(|(s, len)| {
                    let start = s % policy.length;
                    (start, (start + len).min(policy.length))
                })
                .collect();
            task.submit(&policy, Submission { field, present, spans, annotator: "p".into(), at: None }, at()).unwrap();
            prop_assert_eq!(task.cursor, last_cursor + 1);
            last_cursor = task.cursor;
        }
        prop_assert!(task.is_done());
        for a in &task.annotations {
            prop_assert_eq!(policy.excerpt(a.span_start, a.span_end), a.excerpt.clone());
        }
        let doc = export_tilt(&task, &seed()).unwrap();
        prop_assert!(validate(&doc).is_ok());
    }
}
