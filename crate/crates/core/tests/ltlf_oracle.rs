mod common;

use std::collections::BTreeSet;

use common::{all_traces, formula_pool, letters, naive_holds};
use hrgame::ltlf::{eval_trace, is_nnf, to_nnf};
use hrgame::ltlf::{Dfa, Formula, Proposition};
use hrgame::parse;
use proptest::prelude::*;

fn universe() -> BTreeSet<Proposition> {
    ["p", "q", "r"].iter().map(|n| Proposition::new(*n).unwrap()).collect()
}

#[test]
fn dfa_agrees_with_semantics_on_all_short_traces() {
    let traces = all_traces(&letters(&["p", "q", "r"]), 4);
    assert_eq!(traces.len(), 8 + 64 + 512 + 4096);
    for text in formula_pool() {
        let f = parse(text).unwrap();
        let dfa = Dfa::from_formula(&f, &universe()).unwrap();
        for t in &traces {
            let expected = eval_trace(&f, t, 0).unwrap();
            assert_eq!(dfa.accepts(t).unwrap(), expected, "{text} on {t:?}");
        }
    }
}

#[test]
fn library_semantics_matches_naive_evaluator() {
    let traces = all_traces(&letters(&["p", "q", "r"]), 4);
    for text in formula_pool() {
        let f = parse(text).unwrap();
        for t in &traces {
            for i in 0..t.len() {
                assert_eq!(eval_trace(&f, t, i).unwrap(), naive_holds(&f, t.steps(), i), "{text} at {i}");
            }
        }
    }
}

#[test]
fn nnf_preserves_meaning() {
    let traces = all_traces(&letters(&["p", "q", "r"]), 4);
    for text in formula_pool() {
        let f = parse(text).unwrap();
        let g = to_nnf(&f);
        assert!(is_nnf(&g), "{text} -> {g}");
        for t in &traces {
            assert_eq!(eval_trace(&f, t, 0).unwrap(), eval_trace(&g, t, 0).unwrap(), "{text} on {t:?}");
        }
    }
}

#[test]
fn printing_then_parsing_is_identity() {
    for text in formula_pool() {
        let f = parse(text).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f, "{text}");
    }
}

#[test]
fn transition_function_is_total() {
    for text in formula_pool() {
        let f = parse(text).unwrap();
        let dfa = Dfa::from_formula(&f, &universe()).unwrap();
        assert_eq!(dfa.alphabet().len(), 8);
        for q in 0..dfa.num_states() {
            let succ = dfa.successors(q);
            assert_eq!(succ.len(), dfa.alphabet().len());
            assert!(succ.iter().all(|&r| r < dfa.num_states()));
        }
    }
}

#[test]
fn arch_shaped_formula() {
    let f = parse("F (a & X (b & X c)) | F (a2 & X (b2 & X c2))").unwrap();
    assert_eq!(f.propositions().len(), 6);
    let u: BTreeSet<Proposition> = f.propositions();
    let dfa = Dfa::from_formula(&f, &u).unwrap();
    let abc = common::all_traces(&common::letters(&["a", "b", "c"]), 3);
    for t in &abc {
        assert_eq!(dfa.accepts(t).unwrap(), eval_trace(&f, t, 0).unwrap());
    }
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::atom("p")),
        Just(Formula::atom("q")),
        Just(Formula::atom("r")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::weak_next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::globally),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::until(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::release(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_formulas_agree_with_naive_semantics(f in arb_formula()) {
        let dfa = Dfa::from_formula(&f, &universe()).unwrap();
        let g = to_nnf(&f);
        prop_assert!(is_nnf(&g));
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f.clone());
        for t in all_traces(&letters(&["p", "q", "r"]), 3) {
            let want = naive_holds(&f, t.steps(), 0);
            prop_assert_eq!(dfa.accepts(&t).unwrap(), want);
            prop_assert_eq!(eval_trace(&g, &t, 0).unwrap(), want);
        }
    }
}
