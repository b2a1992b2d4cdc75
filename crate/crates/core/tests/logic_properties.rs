use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use syllogic_core::harness::synth::render_text;
use syllogic_core::harness::Lexicon;
use syllogic_core::logic::{decide_validity, Form, SemanticsMode};
use syllogic_core::parser::parse_syllogism;

fn forms() -> Vec<Form> {
    Form::all().collect()
}

proptest! {
    // Verdicts depend on the form only, not on the words filling it.
    #[test]
    fn verdict_ignores_term_content(
        idx in 0usize..256,
        names in prop::collection::hash_set("[a-z]{3,10}", 3),
        minor_first in any::<bool>(),
    ) {
        let form = forms()[idx];
        let names: Vec<String> = names.into_iter().collect();
        let s = form.instantiate(&names[0].as_str().into(), &names[1].as_str().into(), &names[2].as_str().into(), minor_first);
        for mode in SemanticsMode::ALL {
            prop_assert_eq!(decide_validity(&s, mode).unwrap(), form.decide(mode));
        }
    }

    // Rendered text parses back to the structure it was rendered from.
    #[test]
    fn render_parse_round_trip(idx in 0usize..256, seed in any::<u64>(), minor_first in any::<bool>()) {
        let lex = Lexicon::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = &lex.pairs[(seed % lex.pairs.len() as u64) as usize];
        let middle = &lex.middles[(seed / 7 % lex.middles.len() as u64) as usize];
        let s = forms()[idx].instantiate(&pair.subject.as_str().into(), &middle.as_str().into(), &pair.predicate.as_str().into(), minor_first);
        let text = render_text(&s, &mut rng);
        let parsed = parse_syllogism(&text).map_err(|e| TestCaseError::fail(format!("{text}: {}", e.code())))?;
        prop_assert_eq!(parsed, s, "{}", text);
    }
}

#[test]
fn premise_order_does_not_matter() {
    for form in Form::all() {
        let (s, m, p) = (&"s".into(), &"m".into(), &"p".into());
        let a = form.instantiate(s, m, p, false);
        let b = form.instantiate(s, m, p, true);
        for mode in SemanticsMode::ALL {
            assert_eq!(decide_validity(&a, mode).unwrap(), decide_validity(&b, mode).unwrap());
        }
    }
}
