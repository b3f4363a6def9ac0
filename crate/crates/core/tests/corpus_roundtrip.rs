mod common;

use advqa_core::corpus::{
    load_dataset, parse_predictions, parse_squad, read_augmented, write_augmented, Answer, CheckMode,
};
use advqa_core::{AttackType, Dataset, Error, Origin, QAExample};
use common::{fixture_bytes, taxonomy_cases, taxonomy_dataset};
use proptest::prelude::*;

#[test]
fn squad_fixture_reaches_a_fixed_point() {
    let ds = parse_squad(&fixture_bytes("squad_small.json"), CheckMode::Strict)
        .unwrap()
        .value;
    assert_eq!(ds.len(), 12);
    let once = write_augmented(&ds).unwrap();
    let back = read_augmented(&once).unwrap();
    assert_eq!(back.examples, ds.examples);
    assert_eq!(write_augmented(&back).unwrap(), once);
    // sniffing picks the JSONL reader for the written form
    assert_eq!(
        load_dataset(&once, CheckMode::Strict).unwrap().value.examples,
        ds.examples
    );
}

#[test]
fn unicode_offsets_are_characters() {
    let ds = parse_squad(&fixture_bytes("squad_small.json"), CheckMode::Strict)
        .unwrap()
        .value;
    let ex = ds.examples.iter().find(|e| e.id == "lm-6").unwrap();
    let a = &ex.answers[0];
    let got: String = ex
        .context
        .chars()
        .skip(a.answer_start)
        .take(a.text.chars().count())
        .collect();
    assert_eq!(got, "Lake Zürich");
    assert!(a.answer_start < ex.context.find("Lake Zürich").unwrap());
}

#[test]
fn strict_rejects_and_lenient_skips_bad_offsets() {
    let bytes = fixture_bytes("squad_bad_offset.json");
    match parse_squad(&bytes, CheckMode::Strict) {
        Err(Error::OffsetMismatch { id, .. }) => assert_eq!(id, "sb-2"),
        other => panic!("expected offset mismatch, got {other:?}"),
    }
    let lenient = parse_squad(&bytes, CheckMode::Lenient).unwrap();
    assert_eq!(lenient.value.len(), 11);
    assert_eq!(lenient.warnings.len(), 1);
}

#[test]
fn predictions_fixture_parses() {
    let p = parse_predictions(&fixture_bytes("predictions_small.json"), CheckMode::Strict)
        .unwrap()
        .value;
    assert_eq!(p.len(), 12);
    assert_eq!(p.get("sb-2"), Some("24–10"));
}

#[test]
fn schema_errors_name_the_path() {
    let bad = br#"{"version": "1.1", "data": [{"title": "t", "paragraphs": [{"context": "abc", "qas": [{"id": "q", "answers": []}]}]}]}"#;
    let msg = parse_squad(bad, CheckMode::Strict).unwrap_err().to_string();
    assert!(msg.contains("data[0].paragraphs[0].qas[0]"), "{msg}");
    let msg = read_augmented(b"{\"id\": 1}\n").unwrap_err().to_string();
    assert!(msg.contains("line 1"), "{msg}");
}

#[test]
fn taxonomy_fixture_round_trips_with_distractors() {
    let (ds, _) = taxonomy_dataset(&taxonomy_cases());
    let back = read_augmented(&write_augmented(&ds).unwrap()).unwrap();
    assert_eq!(back.examples, ds.examples);
}

fn origin() -> impl Strategy<Value = Origin> {
    prop_oneof![Just(Origin::Clean), Just(Origin::Addsent), Just(Origin::Augmented)]
}

fn attack() -> impl Strategy<Value = Option<AttackType>> {
    prop_oneof![
        Just(None),
        proptest::sample::select(AttackType::ALL.to_vec()).prop_map(Some)
    ]
}

prop_compose! {
    fn example(idx: usize)(
        context in "[a-zA-Zéü\u{4e2d}\u{1F600} ,.\"\\\\\n\t]{1,60}",
        question in "\\PC{0,30}",
        cuts in proptest::collection::vec((0usize..1000, 0usize..1000), 0..3),
        is_impossible in any::<bool>(),
        origin in origin(),
        attack_type in attack(),
        weight in prop_oneof![Just(1.0), Just(2.5), Just(3.0), 1e-9f64..1e6],
        is_negation in any::<bool>(),
        is_entity_rich in any::<bool>(),
        cut_points in proptest::collection::btree_set(0usize..1000, 0..6),
    ) -> QAExample {
        let chars: Vec<char> = context.chars().collect();
        let n = chars.len();
        let answers = cuts
            .into_iter()
            .map(|(a, b)| {
                let (s, e) = (a % n, b % n);
                let (s, e) = (s.min(e), s.max(e) + 1);
                Answer { text: chars[s..e].iter().collect(), answer_start: s }
            })
            .collect();
        // sorted distinct points, paired up, give disjoint non-empty spans
        let points: Vec<usize> = cut_points
            .into_iter()
            .map(|p| p % (n + 1))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let distractor_spans = points.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let answers = if is_impossible { Vec::new() } else { answers };
        QAExample {
            id: format!("p{idx}"),
            question,
            context,
            answers,
            is_impossible,
            origin,
            attack_type,
            loss_weight: weight,
            is_negation,
            is_entity_rich,
            distractor_spans,
        }
    }
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (0usize..6)
        .prop_flat_map(|n| (0..n).map(example).collect::<Vec<_>>())
        .prop_map(|examples| Dataset::new(examples, "prop").unwrap())
}

proptest! {
    #[test]
    fn jsonl_is_lossless(ds in dataset()) {
        let bytes = write_augmented(&ds).unwrap();
        prop_assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), ds.len());
        let back = read_augmented(&bytes).unwrap();
        prop_assert_eq!(&back.examples, &ds.examples);
        prop_assert_eq!(write_augmented(&back).unwrap(), bytes);
    }

    #[test]
    fn garbage_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_squad(&bytes, CheckMode::Strict);
        let _ = parse_predictions(&bytes, CheckMode::Lenient);
        let _ = read_augmented(&bytes);
    }
}
