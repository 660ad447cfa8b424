//! Property suites: solver vs truth-table oracle, MUS minimality,
//! entailment laws, acceptance monotonicity, and the expected-utility
//! dominance guarantee.

use proptest::prelude::*;

use evprob::acceptance::{accepted_set, is_accepted, AcceptanceLevel, Universe};
use evprob::evidence::{EvidenceBase, EvidenceItem};
use evprob::logic::mus::minimal_inconsistent_subsets;
use evprob::logic::parser::{parse_formula, parse_program};
use evprob::logic::solver::{self, oracle, DEFAULT_ATOM_BUDGET};
use evprob::logic::{Atom, Formula, Theory};
use evprob::scenarios::expected_utility_comparison;

fn atom(i: u32) -> Formula {
    Formula::Atom(Atom::new(i, vec![]))
}

/// Random ground formulas over `atoms` nullary predicates.
fn formula_strategy(atoms: u32) -> impl Strategy<Value = Formula> {
    let leaf = (0..atoms).prop_map(atom);
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::or),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn theory_strategy(atoms: u32) -> impl Strategy<Value = Theory> {
    prop::collection::vec(formula_strategy(atoms), 1..6)
        .prop_map(|fs| fs.into_iter().collect())
}

proptest! {
    #[test]
    fn solver_agrees_with_oracle_on_consistency(theory in theory_strategy(6)) {
        let fast = solver::consistent(&theory, DEFAULT_ATOM_BUDGET).unwrap();
        let slow = oracle::consistent(&theory).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn solver_agrees_with_oracle_on_entailment(
        theory in theory_strategy(6),
        goal in formula_strategy(6),
    ) {
        let fast = solver::entails(&theory, &goal, DEFAULT_ATOM_BUDGET).unwrap();
        let slow = oracle::entails(&theory, &goal).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn modus_ponens(a in formula_strategy(5), b in formula_strategy(5)) {
        let theory = Theory::from_sentences(vec![
            a.clone(),
            Formula::implies(a, b.clone()),
        ]);
        prop_assert!(solver::entails(&theory, &b, DEFAULT_ATOM_BUDGET).unwrap());
    }

    #[test]
    fn entailment_is_monotone(
        theory in theory_strategy(5),
        extra in formula_strategy(5),
        goal in formula_strategy(5),
    ) {
        if solver::entails(&theory, &goal, DEFAULT_ATOM_BUDGET).unwrap() {
            let mut bigger = theory.clone();
            bigger.push(extra);
            prop_assert!(solver::entails(&bigger, &goal, DEFAULT_ATOM_BUDGET).unwrap());
        }
    }

    /// Every extracted core is inconsistent and loses inconsistency when
    /// any single member is removed (oracle-checked).
    #[test]
    fn mus_cores_are_minimal(theory in theory_strategy(5)) {
        if solver::consistent(&theory, DEFAULT_ATOM_BUDGET).unwrap() {
            return Ok(());
        }
        let cores = minimal_inconsistent_subsets(&theory, 3, DEFAULT_ATOM_BUDGET).unwrap();
        prop_assert!(!cores.is_empty());
        for core in &cores {
            let t: Theory = core.iter().cloned().collect();
            prop_assert!(!oracle::consistent(&t).unwrap());
            for skip in 0..core.len() {
                let sub: Theory = core
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, f)| f.clone())
                    .collect();
                prop_assert!(oracle::consistent(&sub).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// The probabilistic policy optimizes the stated objective, so it can
    /// never total less than the acceptance policy.
    #[test]
    fn eu_probabilistic_dominates_acceptance(
        n in 1usize..1000,
        p in 0.001f64..0.999,
        gain in 0.01f64..100.0,
        loss in 0.01f64..100.0,
        eps in 0.011f64..0.489,
    ) {
        let level = AcceptanceLevel::new(eps).unwrap();
        let cmp = expected_utility_comparison(n, p, gain, loss, level).unwrap();
        prop_assert!(
            cmp.eu_probabilistic >= cmp.eu_acceptance,
            "n={n} p={p} gain={gain} loss={loss} eps={eps}: {} < {}",
            cmp.eu_probabilistic,
            cmp.eu_acceptance,
        );
    }
}

fn bird_base(lower: f64) -> EvidenceBase {
    let text = format!(
        "const tweety, other.\n\
         stat x: flies(x) | bird(x) in [{lower}, 1.0].\n\
         fact bird(tweety).\n"
    );
    let prog = parse_program(&text).unwrap();
    EvidenceBase::from_program(&prog, DEFAULT_ATOM_BUDGET).unwrap()
}

proptest! {
    /// Accepted at a stricter threshold implies accepted at a looser one,
    /// and the single-statistic interval is exactly [q, 1].
    #[test]
    fn acceptance_monotone_in_epsilon(
        q in 0.5f64..0.999,
        e1 in 0.011f64..0.489,
        e2 in 0.011f64..0.489,
    ) {
        let (strict, loose) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let base = bird_base(q);
        let mut sig = (**base.signature()).clone();
        let flies = parse_formula("flies(tweety)", &mut sig).unwrap();
        let (iv, _) = evprob::ep::evidential_probability(&base, &flies).unwrap();
        prop_assert_eq!(iv.lower, q);
        prop_assert_eq!(iv.upper, 1.0);
        let at_strict =
            is_accepted(&base, &flies, AcceptanceLevel::new(strict).unwrap()).unwrap();
        let at_loose =
            is_accepted(&base, &flies, AcceptanceLevel::new(loose).unwrap()).unwrap();
        if at_strict {
            prop_assert!(at_loose);
        }
    }
}

/// Asserting then retracting the same sentence restores the corpus.
#[test]
fn assert_retract_round_trip() {
    let text = "const tweety, other.\n\
                rule all x: penguin(x) -> bird(x).\n\
                rule all x: penguin(x) -> ~flies(x).\n\
                stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
                fact bird(tweety).\n";
    let prog = parse_program(text).unwrap();
    let base = EvidenceBase::from_program(&prog, DEFAULT_ATOM_BUDGET).unwrap();
    let mut sig = (**base.signature()).clone();
    let penguin = parse_formula("penguin(tweety)", &mut sig).unwrap();
    let universe = Universe::new(
        "tweety",
        [
            parse_formula("flies(tweety)", &mut sig).unwrap(),
            parse_formula("~flies(tweety)", &mut sig).unwrap(),
            parse_formula("bird(tweety)", &mut sig).unwrap(),
        ],
    );
    let level = AcceptanceLevel::new(0.05).unwrap();
    let before = accepted_set(&base, level, &universe).unwrap();

    let item = EvidenceItem::Sentence(penguin);
    let asserted = base.assert_evidence(item.clone()).unwrap();
    let during = accepted_set(&asserted, level, &universe).unwrap();
    assert_ne!(
        before.sentences().map(|f| f.normalize()).collect::<Vec<_>>(),
        during.sentences().map(|f| f.normalize()).collect::<Vec<_>>(),
    );

    let restored = asserted.retract_evidence(&item).unwrap();
    let after = accepted_set(&restored, level, &universe).unwrap();
    assert_eq!(
        before.sentences().map(|f| f.normalize()).collect::<Vec<_>>(),
        after.sentences().map(|f| f.normalize()).collect::<Vec<_>>(),
    );
}
