use advqa_core::attacks::{generate, Templates, ENTITY_WEIGHT, NEGATION_WEIGHT};
use advqa_core::synthetic::{synthetic_corpus, SyntheticSpec};
use advqa_core::{AttackType, Dataset, Origin, QAExample};
use proptest::prelude::*;
use std::sync::OnceLock;

fn corpus() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| {
        let mut spec = SyntheticSpec::new(200, 4, "k");
        spec.negation_fraction = 0.1;
        synthetic_corpus(&spec).unwrap()
    })
}

fn chars(s: &str, start: usize, len: usize) -> String {
    s.chars().skip(start).take(len).collect()
}

fn check_generated(attack: AttackType, src: &QAExample, out: &QAExample) -> Result<(), TestCaseError> {
    prop_assert_eq!(out.attack_type, Some(attack));
    prop_assert_eq!(out.origin, Origin::Augmented);
    prop_assert_eq!(out.id.clone(), format!("{}-{}", src.id, attack));
    prop_assert!(out.validate().is_ok(), "{:?}", out.validate());
    for a in &out.answers {
        prop_assert_eq!(
            chars(&out.context, a.answer_start, a.text.chars().count()),
            a.text.clone()
        );
    }
    let want_weight = match attack {
        AttackType::AdditiveNegation | AttackType::TransformativeNegation => NEGATION_WEIGHT,
        AttackType::EntitySubstitution => ENTITY_WEIGHT,
        _ => 1.0,
    };
    prop_assert_eq!(out.loss_weight, want_weight);
    if attack == AttackType::TransformativeNegation {
        prop_assert!(out.is_impossible && out.answers.is_empty() && out.is_negation);
        prop_assert!(out.has_negation_marker());
        prop_assert!(out.context != src.context);
    } else {
        prop_assert!(out.context.starts_with(&src.context));
        prop_assert_eq!(&out.answers, &src.answers);
        prop_assert_eq!(out.distractor_spans.len(), src.distractor_spans.len() + 1);
        let &(s, e) = out.distractor_spans.last().unwrap();
        prop_assert_eq!(e, out.context.chars().count());
        prop_assert!(s >= src.context.chars().count());
    }
    prop_assert_eq!(
        out.is_negation,
        matches!(
            attack,
            AttackType::AdditiveNegation | AttackType::TransformativeNegation
        )
    );
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_examples_keep_their_invariants(
        idx in 0usize..200,
        attack in proptest::sample::select(AttackType::ALL.to_vec()),
        seed in any::<u64>(),
    ) {
        let templates = Templates::default();
        let src = &corpus().examples[idx];
        if let Ok(out) = generate(attack, src, seed, &templates) {
            check_generated(attack, src, &out)?;
            let again = generate(attack, src, seed, &templates).unwrap();
            prop_assert_eq!(out, again);
        }
    }
}

#[test]
fn every_attack_produces_output_on_the_corpus() {
    let templates = Templates::default();
    for attack in AttackType::ALL {
        let made = corpus()
            .examples
            .iter()
            .filter(|ex| generate(attack, ex, 1, &templates).is_ok())
            .count();
        assert!(made > 0, "{attack} generated nothing");
    }
}
