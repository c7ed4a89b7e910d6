use std::path::PathBuf;

use proptest::prelude::*;
use proptest::test_runner::Config;
use transparency_core::score::*;
use transparency_core::testing;
use transparency_core::tilt::*;

fn fixture(name: &str) -> TiltDocument {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tilt").join(name);
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn items(report: &ScoreReport) -> Vec<(&str, i32)> {
    report.breakdown.iter().map(|i| (i.code.as_str(), i.points)).collect()
}

#[test]
fn complete_document_scores_full_marks() {
    let r = compute_score(&fixture("complete.tilt"), &ExternalSignals::default());
    assert_eq!(r.score, 100);
    assert_eq!(r.raw_score, 100);
    assert_eq!(r.label, Label::Green);
    assert!(r.breakdown.is_empty());
}

#[test]
fn phishing_flag_costs_fifty() {
    let signals = ExternalSignals { phishing_flagged: true, ..Default::default() };
    let r = compute_score(&fixture("complete.tilt"), &signals);
    assert_eq!(items(&r), vec![("PHISH", -50)]);
    assert_eq!(r.score, 50);
    assert_eq!(r.label, Label::Yellow);
}

#[test]
fn trackers_transfer_and_tosdr() {
    let mut doc = fixture("complete.tilt");
    doc.third_country_transfers.push(ThirdCountryTransfer { country: "US".into(), adequacy_decision: false, safeguards: None });
    let signals = ExternalSignals { tracker_count: 12, tosdr_grade: Some(TosdrGrade::E), ..Default::default() };
    let r = compute_score(&doc, &signals);
    assert_eq!(items(&r), vec![("TRACKERS", -40), ("TRANSFER", -10), ("TOSDR", -10)]);
    assert_eq!(r.score, 40);
    assert_eq!(r.label, Label::Yellow);
}

#[test]
fn caps_and_clamping() {
    let mut doc = fixture("minimal.tilt");
    for c in ["US", "CN", "IN"] {
        doc.third_country_transfers.push(ThirdCountryTransfer { country: c.into(), adequacy_decision: false, safeguards: None });
    }
    doc.automated_decision_making = Some(AdmInfo { in_use: true, logic_description: None, consequences: None });
    let signals = ExternalSignals {
        tracker_count: 100,
        phishing_flagged: true,
        tosdr_grade: Some(TosdrGrade::D),
        privacy_spy_score: Some(2.4),
    };
    let r = compute_score(&doc, &signals);
    // minimal misses C04 C05 C07 C09 C10 C12; C08 and C14 are priced separately
    assert_eq!(
        items(&r),
        vec![("TRACKERS", -40), ("PHISH", -50), ("TRANSFER", -20), ("ADM_OPAQUE", -10), ("MISSING", -12), ("TOSDR", -6), ("PSPY", -8)]
    );
    assert_eq!(r.raw_score, -46);
    assert_eq!(r.score, 0);
    assert_eq!(r.label, Label::Red);
}

#[test]
fn tosdr_bonus_and_privacy_spy_rounding() {
    let doc = fixture("complete.tilt");
    let r = compute_score(&doc, &ExternalSignals { tosdr_grade: Some(TosdrGrade::A), privacy_spy_score: Some(9.5), ..Default::default() });
    // 10 - 9.5 = 0.5 rounds away from zero
    assert_eq!(items(&r), vec![("TOSDR", 5), ("PSPY", -1)]);
    assert_eq!(r.raw_score, 104);
    assert_eq!(r.score, 100);
}

#[test]
fn summary_cards() {
    let card = summarize(&fixture("streamly.tilt"), &ExternalSignals { tracker_count: 7, ..Default::default() });
    assert_eq!(card.controller_name, "Streamly Inc.");
    assert_eq!(card.transfer_count, 2);
    assert!(card.adm_in_use);
    assert_eq!(card.tracker_count, 7);

    let card = summarize(&fixture("minimal.tilt"), &ExternalSignals::default());
    assert_eq!(card.transfer_count, 0);
    assert!(!card.adm_in_use);
    assert_eq!(card.missing_disclosures, 6);
}

proptest! {
    #![proptest_config(Config::with_cases(500))]

    #[test]
    fn score_invariants(doc in testing::document(), s in testing::signals(), extra in 1u32..10) {
        let r = compute_score(&doc, &s);
        prop_assert!(r.score <= 100);
        prop_assert_eq!(r.raw_score, 100 + r.breakdown.iter().map(|i| i.points).sum::<i32>());
        prop_assert_eq!(i32::from(r.score), r.raw_score.clamp(0, 100));
        prop_assert_eq!(r.label, Label::for_score(r.score));

        let more = ExternalSignals { tracker_count: s.tracker_count + extra, ..s.clone() };
        prop_assert!(compute_score(&doc, &more).score <= r.score);

        let phish = ExternalSignals { phishing_flagged: true, ..s.clone() };
        prop_assert!(compute_score(&doc, &phish).score <= r.score);

        let mut worse = doc.clone();
        worse.third_country_transfers.push(ThirdCountryTransfer { country: "US".into(), adequacy_decision: false, safeguards: None });
        prop_assert!(compute_score(&worse, &s).score <= r.score);

        let card = summarize(&doc, &s);
        prop_assert_eq!(card.transfer_count, doc.third_country_transfers.len());
        prop_assert_eq!(card.missing_disclosures, check_completeness(&doc).missing_count());
    }
}
