use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use transparency_core::testing;
use transparency_core::tilt::{self, TiltDocument};
use transparency_hub::testing::check_answers;
use transparency_hub::{answer_question, Intent, IntentKind};

const FIXTURES: [&str; 4] = ["bakery.tilt", "complete.tilt", "minimal.tilt", "streamly.tilt"];

fn fixture(name: &str) -> TiltDocument {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tilt").join(name);
    tilt::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixtures_answer_soundly() {
    for f in FIXTURES {
        check_answers(&fixture(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
    }
}

#[test]
fn controller_identity() {
    let a = answer_question(&fixture("minimal.tilt"), &Intent::new(IntentKind::ControllerIdentity)).unwrap();
    assert_eq!(a.answer_text, "Verantwortlich für Ihre Daten ist ACME GmbH, Hauptstraße 1, 10115 Berlin (DE).");
    assert_eq!(a.evidence_paths, ["controller/name", "controller/address", "controller/country"]);
}

#[test]
fn transfers_state_count_and_countries() {
    let a = answer_question(&fixture("streamly.tilt"), &Intent::new(IntentKind::ThirdCountryTransfers)).unwrap();
    assert_eq!(a.answer_text, "Number of third-country transfers: 2 (US, IN).");
    assert_eq!(a.evidence_paths, ["thirdCountryTransfers", "thirdCountryTransfers/0/country", "thirdCountryTransfers/1/country"]);
    let a = answer_question(&fixture("complete.tilt"), &Intent::new(IntentKind::ThirdCountryTransfers)).unwrap();
    assert_eq!(a.answer_text, "Number of third-country transfers: 0 (none).");
}

#[test]
fn adm_and_rights() {
    let a = answer_question(&fixture("bakery.tilt"), &Intent::new(IntentKind::AdmInUse)).unwrap();
    assert_eq!(a.answer_text, "Automatisierte Entscheidungsfindung im Einsatz: nein.");
    let a = answer_question(&fixture("complete.tilt"), &Intent::new(IntentKind::AdmInUse)).unwrap();
    assert_eq!(a.answer_text, "Automated decision-making in use: not stated.");
    let a = answer_question(&fixture("streamly.tilt"), &Intent::new(IntentKind::RightsSummary)).unwrap();
    assert!(a.answer_text.starts_with("Your rights: access, erasure."), "{}", a.answer_text);
}

#[test]
fn unknown_category_and_missing_parameter() {
    let doc = fixture("complete.tilt");
    let err = answer_question(&doc, &Intent::for_category(IntentKind::PurposesForCategory, "nonexistent")).unwrap_err();
    assert_eq!(err.name(), "UnknownCategoryError");
    let err = answer_question(&doc, &Intent::new(IntentKind::RetentionForCategory)).unwrap_err();
    assert_eq!(err.name(), "InvalidIntentError");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_documents_answer_soundly(doc in testing::document()) {
        if let Err(e) = check_answers(&doc) {
            prop_assert!(false, "{}", e);
        }
    }
}
