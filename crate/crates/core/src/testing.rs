//! Proptest strategies for documents and signals, and a generator for
//! export archives.

use std::fs;
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;
use proptest::sample::select;
use serde_json::Value;

use crate::score::{ExternalSignals, TosdrGrade};
use crate::tilt::*;

const COUNTRIES: &[&str] = &["DE", "FR", "AT", "NL", "US", "GB", "CN", "IN", "BR", "CH", "IE", "JP", "NO"];
const LANGUAGES: &[&str] = &["de", "en", "fr", "es", "it", "nl"];
const BASES: &[&str] = &[
    "GDPR-6-1-a",
    "GDPR-6-1-b",
    "GDPR-6-1-c",
    "GDPR-6-1-f",
    "GDPR-9-2-a",
    "berechtigtes Interesse",
    "",
];
const DURATIONS: &[&str] = &["P1Y", "P6M", "P30D", "PT24H", "P2Y6M", "P1W"];

pub fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 äöüß\"\\\\\n€𝄞./@-]{0,12}"
}

pub fn nonblank() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9 äöü]{0,10}"
}

pub fn country() -> impl Strategy<Value = String> {
    select(COUNTRIES).prop_map(str::to_string)
}

pub fn timestamp() -> impl Strategy<Value = DateTime<Utc>> {
    (946_684_800i64..1_900_000_000i64, prop_oneof![Just(0u32), 0u32..1_000_000_000u32])
        .prop_map(|(s, n)| Utc.timestamp_opt(s, n).unwrap())
}

pub fn contact_point() -> impl Strategy<Value = ContactPoint> {
    (nonblank(), option::of("[a-z]{1,8}@[a-z]{1,8}\\.de"), option::of("\\+49 [0-9]{4,8}"))
        .prop_filter_map("needs email or phone", |(name, email, phone)| {
            let cp = ContactPoint { name, email, phone };
            cp.has_contact().then_some(cp)
        })
}

pub fn meta() -> impl Strategy<Value = Meta> {
    ("[a-z][a-z0-9-]{0,10}", text(), 1u64..50, timestamp(), 0i64..100_000_000, select(LANGUAGES)).prop_map(
        |(id, name, version, created, delta, language)| Meta {
            id,
            name,
            version,
            created,
            modified: created + chrono::Duration::seconds(delta),
            language: language.to_string(),
            hash: String::new(),
        },
    )
}

pub fn purpose() -> impl Strategy<Value = Purpose> {
    (text(), select(BASES), option::of(text())).prop_map(|(description, basis, legitimate_interest)| Purpose {
        description,
        legal_basis: basis.to_string(),
        legitimate_interest,
    })
}

pub fn storage() -> impl Strategy<Value = Storage> {
    prop_oneof![
        select(DURATIONS).prop_map(|d| Storage { kind: StorageKind::Duration, value: d.to_string() }),
        text().prop_map(|value| Storage { kind: StorageKind::Criterion, value }),
    ]
}

pub fn data_disclosed() -> impl Strategy<Value = DataDisclosed> {
    (
        nonblank(),
        vec(purpose(), 0..3),
        vec((text(), text(), country()).prop_map(|(name, category, country)| Recipient { name, category, country }), 0..3),
        option::of(storage()),
        option::of(text()),
    )
        .prop_map(|(category, purposes, recipients, storage, requirement_note)| DataDisclosed {
            category,
            purposes,
            recipients,
            storage,
            requirement_note,
        })
}

pub fn transfer() -> impl Strategy<Value = ThirdCountryTransfer> {
    (country(), any::<bool>(), option::of(text())).prop_map(|(country, adequacy_decision, safeguards)| {
        ThirdCountryTransfer { country, adequacy_decision, safeguards }
    })
}

fn right() -> impl Strategy<Value = Option<RightEntry>> {
    option::of((any::<bool>(), option::of(text())).prop_map(|(a, d)| RightEntry::new(a, d)))
}

pub fn rights() -> impl Strategy<Value = RightsInfo> {
    (right(), right(), right(), right(), right(), right(), right(), option::of(contact_point())).prop_map(
        |(access, rectification, erasure, restriction, portability, objection, withdraw_consent, complaint_authority)| {
            RightsInfo {
                access,
                rectification,
                erasure,
                restriction,
                portability,
                objection,
                withdraw_consent,
                complaint_authority,
            }
        },
    )
}

pub fn adm() -> impl Strategy<Value = AdmInfo> {
    (any::<bool>(), option::of(text()), option::of(text())).prop_map(|(in_use, logic_description, consequences)| {
        AdmInfo { in_use, logic_description, consequences }
    })
}

/// Valid documents with their hash filled in.
pub fn document() -> impl Strategy<Value = TiltDocument> {
    (
        meta(),
        (text(), text(), country(), option::of(contact_point())),
        option::of(contact_point()),
        vec(data_disclosed(), 0..4),
        vec(transfer(), 0..3),
        rights(),
        option::of(adm()),
        vec("https://[a-z]{1,8}\\.example/[a-z]{0,6}", 0..3),
    )
        .prop_map(|(meta, (name, address, country, representative), dpo, data_disclosed, transfers, rights, adm, sources)| {
            TiltDocument {
                meta,
                controller: Controller { name, address, country, representative },
                dpo,
                data_disclosed,
                third_country_transfers: transfers,
                rights,
                automated_decision_making: adm,
                sources,
            }
            .sealed()
        })
}

/// Pairs of documents that share a random subset of their top-level fields,
/// so diffs range from empty to total.
pub fn document_pair() -> impl Strategy<Value = (TiltDocument, TiltDocument)> {
    (document(), document(), proptest::array::uniform8(any::<bool>())).prop_map(|(a, b, take)| {
        let mut c = a.clone();
        if take[0] {
            c.meta = b.meta.clone();
        }
        if take[1] {
            c.controller = b.controller.clone();
        }
        if take[2] {
            c.dpo = b.dpo.clone();
        }
        if take[3] {
            c.data_disclosed = b.data_disclosed.clone();
        }
        if take[4] {
            c.third_country_transfers = b.third_country_transfers.clone();
        }
        if take[5] {
            c.rights = b.rights.clone();
        }
        if take[6] {
            c.automated_decision_making = b.automated_decision_making.clone();
        }
        if take[7] {
            c.sources = b.sources.clone();
        }
        (a, c.sealed())
    })
}

pub fn signals() -> impl Strategy<Value = ExternalSignals> {
    (
        0u32..30,
        any::<bool>(),
        option::of(select(vec![TosdrGrade::A, TosdrGrade::B, TosdrGrade::C, TosdrGrade::D, TosdrGrade::E])),
        option::of(0.0f64..=10.0),
    )
        .prop_map(|(tracker_count, phishing_flagged, tosdr_grade, privacy_spy_score)| ExternalSignals {
            tracker_count,
            phishing_flagged,
            tosdr_grade,
            privacy_spy_score,
        })
}

/// File names written by [`write_archive`], one per record kind in
/// posts, messages, profile, activity, other order.
pub const ARCHIVE_FILES: [&str; 5] = ["posts.json", "messages.jsonl", "profile.json", "activity.csv", "misc.json"];

/// Writes an export archive with `counts[i]` timestamped records in
/// `ARCHIVE_FILES[i]`, in reverse file order when asked.
pub fn write_archive(dir: &Path, counts: &[usize; 5], reverse: bool) -> std::io::Result<()> {
    let mut order: Vec<usize> = (0..5).collect();
    if reverse {
        order.reverse();
    }
    for i in order {
        let n = counts[i];
        let body = match i {
            1 => (0..n).map(|k| format!("{{\"timestamp\": {}}}\n", 1_546_300_800 + k * 86_400)).collect::<String>(),
            3 => std::iter::once("timestamp,value\n".to_string())
                .chain((0..n).map(|k| format!("{},{k}\n", 1_550_000_000 + k * 3_600)))
                .collect(),
            _ => format!("[{}]", vec!["{\"date\": \"2021-06-01T00:00:00Z\"}"; n].join(",")),
        };
        fs::write(dir.join(ARCHIVE_FILES[i]), body)?;
    }
    Ok(())
}

pub fn archive_counts() -> impl Strategy<Value = [usize; 5]> {
    proptest::array::uniform5(0usize..40)
}

/// xorshift64; a zero seed is replaced.
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

fn scrambled(value: &Value, rng: &mut XorShift, depth: usize, out: &mut String) {
    let pad = |out: &mut String, d: usize| {
        out.push('\n');
        out.push_str(&"\t ".repeat(d));
    };
    match value {
        Value::Object(map) => {
            let mut keys: Vec<_> = map.keys().collect();
            rng.shuffle(&mut keys);
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ,");
                }
                pad(out, depth + 1);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(" : ");
                scrambled(&map[k.as_str()], rng, depth + 1, out);
            }
            pad(out, depth);
            out.push('}');
        }
        Value::Array(items) => {
            out.push_str("[ ");
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\r\n ");
                }
                scrambled(v, rng, depth + 1, out);
            }
            out.push_str(" ]");
        }
        other => out.push_str(&other.to_string()),
    }
}

/// JSON text of `value` with keys shuffled and irregular whitespace.
pub fn scrambled_json(value: &Value, seed: u64) -> String {
    let mut rng = XorShift(seed.max(1));
    let mut text = String::from("  \n");
    scrambled(value, &mut rng, 0, &mut text);
    text
}
