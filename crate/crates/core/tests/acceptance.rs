//! End-to-end acceptance checks for the worked examples and engine
//! guarantees. Each test prints one `criterion N: pass|FAIL` line; the
//! CLI golden determinism check (criterion 10) lives in the CLI crate's
//! test suite.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evprob::acceptance::{
    accepted_set, corpus_report_with, serious_possibility_in, update_diff, AcceptanceLevel,
    ReportOptions,
};
use evprob::ep::evidential_probability;
use evprob::evidence::{EvidenceItem, ProbabilityInterval};
use evprob::logic::solver::{self, oracle, DEFAULT_ATOM_BUDGET};
use evprob::logic::{Atom, Formula, Theory};
use evprob::rivals::{compute_extensions, is_extension, mh_derive, replay_trace};
use evprob::scenarios::{
    build_scenario, expected_utility_comparison, PolicyDecision, ScenarioName,
};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_tweety_sequence() {
    let scenario = build_scenario(ScenarioName::Tweety).unwrap();
    let level = AcceptanceLevel::new(0.05).unwrap();
    let sig = scenario.signature();
    let flies = scenario.universe.sentences()[0].clone();
    let not_flies = scenario.universe.sentences()[1].clone();
    let penguin = scenario.universe.sentences()[3].clone();

    let stage1 = &scenario.stages[1].base;
    let accepted = evprob::acceptance::is_accepted(stage1, &flies, level).unwrap();
    let diff = update_diff(stage1, EvidenceItem::Sentence(penguin), level, &scenario.universe)
        .unwrap();
    let retracted_exact = diff.retracted.len() == 1
        && diff.retracted[0].normalize() == flies.normalize();
    let added_has_negation = diff
        .added
        .iter()
        .any(|f| f.normalize() == not_flies.normalize());
    report(
        1,
        accepted && retracted_exact && added_has_negation,
        &format!(
            "stage-1 accepts {}; penguin update retracts it and adds {}",
            flies.display(sig),
            not_flies.display(sig)
        ),
    );
}

#[test]
fn criterion_2_nixon_diamond() {
    let scenario = build_scenario(ScenarioName::Nixon).unwrap();
    let level = AcceptanceLevel::new(scenario.epsilon).unwrap();
    let pac = scenario.universe.sentences()[0].clone();
    let not_pac = scenario.universe.sentences()[1].clone();

    let quaker_accepts =
        evprob::acceptance::is_accepted(&scenario.stages[1].base, &pac, level).unwrap();
    let republican_accepts =
        evprob::acceptance::is_accepted(&scenario.stages[2].base, &not_pac, level).unwrap();
    let combined = &scenario.stages[3].base;
    let neither = !evprob::acceptance::is_accepted(combined, &pac, level).unwrap()
        && !evprob::acceptance::is_accepted(combined, &not_pac, level).unwrap();
    let (iv, _) = evidential_probability(combined, &pac).unwrap();
    report(
        2,
        quaker_accepts && republican_accepts && neither && iv == ProbabilityInterval::VACUOUS,
        &format!("combined interval = {iv}"),
    );
}

#[test]
fn criterion_3_cohabitation() {
    let scenario = build_scenario(ScenarioName::Cohabitation).unwrap();
    let level = AcceptanceLevel::new(0.01).unwrap();
    let base = &scenario.stages[0].base;
    let disj = scenario.universe.sentences()[0].clone();
    let toronto = scenario.universe.sentences()[1].clone();
    let vancouver = scenario.universe.sentences()[2].clone();

    let (iv, _) = evidential_probability(base, &disj).unwrap();
    let disj_ok = evprob::acceptance::is_accepted(base, &disj, level).unwrap()
        && iv == ProbabilityInterval::new(0.99, 1.0).unwrap();
    let neither = !evprob::acceptance::is_accepted(base, &toronto, level).unwrap()
        && !evprob::acceptance::is_accepted(base, &vancouver, level).unwrap();
    let extensions =
        compute_extensions(scenario.defaults.as_ref().unwrap(), base.atom_budget()).unwrap();
    report(
        3,
        disj_ok && neither && extensions.len() == 2,
        &format!("disjunction {iv}, {} extensions", extensions.len()),
    );
}

#[test]
fn criterion_4_lottery_probabilistic() {
    let n = 100usize;
    let scenario = build_scenario(ScenarioName::Lottery { n }).unwrap();
    assert_eq!(scenario.epsilon, 0.05);
    let level = AcceptanceLevel::new(0.05).unwrap();
    let base = &scenario.stages[0].base;
    let q = (n as f64 - 1.0) / n as f64;
    let point = ProbabilityInterval::point(q).unwrap();

    let mut loses_ok = true;
    for lose in &scenario.universe.sentences()[..n] {
        let (iv, _) = evidential_probability(base, lose).unwrap();
        loses_ok &= iv == point && iv.lower >= level.threshold();
    }
    let some_wins = &scenario.universe.sentences()[n];
    let all_lose = &scenario.universe.sentences()[n + 1];
    let (iv_sw, _) = evidential_probability(base, some_wins).unwrap();
    let (iv_al, _) = evidential_probability(base, all_lose).unwrap();

    let report_out = corpus_report_with(
        base,
        level,
        &scenario.universe,
        ReportOptions { max_cores: 1, extend_universe: false },
    )
    .unwrap();
    let pass = loses_ok
        && iv_sw == ProbabilityInterval::CERTAIN
        && iv_al == ProbabilityInterval::IMPOSSIBLE
        && !report_out.jointly_consistent
        && report_out.cores.len() == 1
        && report_out.cores[0].len() == n + 1
        && report_out.single_premise_violations.is_empty();
    report(
        4,
        pass,
        &format!(
            "all {n} loses at {point}, core size {}, {} closure violations",
            report_out.cores.first().map_or(0, |c| c.len()),
            report_out.single_premise_violations.len()
        ),
    );
}

#[test]
fn criterion_5_lottery_default_logic() {
    let scenario = build_scenario(ScenarioName::Lottery { n: 4 }).unwrap();
    let theory = scenario.defaults.as_ref().unwrap();
    let budget = scenario.stages[0].base.atom_budget();
    let extensions = compute_extensions(theory, budget).unwrap();
    let four_of_three = extensions.len() == 4
        && extensions.iter().all(|e| e.consequents.len() == 3);

    // exhaustive cross-check over every generator subset
    let mut confirmed = 0usize;
    let mut spurious = 0usize;
    for mask in 0u32..(1 << 4) {
        let consequents: Vec<Formula> = (0..4)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| theory.defaults[i].consequent.clone())
            .collect();
        if is_extension(theory, &consequents, budget).unwrap() {
            let key: BTreeSet<Formula> =
                consequents.iter().map(|f| f.normalize()).collect();
            let known = extensions.iter().any(|e| {
                e.consequents.iter().map(|f| f.normalize()).collect::<BTreeSet<_>>() == key
            });
            if known {
                confirmed += 1;
            } else {
                spurious += 1;
            }
        }
    }
    report(
        5,
        four_of_three && confirmed == 4 && spurious == 0,
        &format!("{} extensions, {confirmed} confirmed by subset sweep", extensions.len()),
    );
}

#[test]
fn criterion_6_lottery_mh_rules() {
    let scenario = build_scenario(ScenarioName::Lottery { n: 3 }).unwrap();
    let mh = scenario.mh.as_ref().unwrap();
    let budget = scenario.stages[0].base.atom_budget();
    assert_eq!(mh.rules, [1u8, 2, 3, 4, 5].into_iter().collect());

    let trace = mh_derive(&mh.sigma0, &mh.rules, &mh.goals, mh.step_bound, budget).unwrap();
    let both_derived = trace.goals.len() == 2 && trace.goals.iter().all(|(_, r)| r.is_some());
    let within_bound = trace.steps.len() <= mh.sigma0.len() + mh.step_bound;
    let replays = replay_trace(&trace, &mh.sigma0, &mh.rules, budget).unwrap();

    let mut with_six = mh.rules.clone();
    with_six.insert(6);
    let contradiction_goal = vec![mh.contradiction_goal.clone().unwrap()];
    let six_trace =
        mh_derive(&mh.sigma0, &with_six, &contradiction_goal, mh.step_bound, budget).unwrap();
    report(
        6,
        both_derived && within_bound && replays && six_trace.inconsistency_detected,
        &format!(
            "both Probably goals derived in {} steps, replay ok, rule 6 contradiction flagged",
            trace.steps.len()
        ),
    );
}

#[test]
fn criterion_7_measurement_batch() {
    let n = 10_000usize;
    let scenario = build_scenario(ScenarioName::Measurement {
        n,
        tolerance: 0.05,
        error_prob: 0.001,
    })
    .unwrap();
    assert_eq!(scenario.epsilon, 0.01);
    let level = AcceptanceLevel::new(0.01).unwrap();
    let base = &scenario.stages[0].base;

    // independent oracle: 1 − (999/1000)^10000 in exact rational arithmetic
    let ratio = BigRational::new(BigInt::from(999), BigInt::from(1000));
    let exact = BigRational::from(BigInt::from(1)) - ratio.pow(n as i32);
    let oracle_lower = exact.to_f64().unwrap();

    let some_error = scenario.universe.sentences()[0].clone();
    let (iv_se, _) = evidential_probability(base, &some_error).unwrap();
    let lower_matches = (iv_se.lower - oracle_lower).abs() < 1e-9;
    let se_accepted = iv_se.lower >= level.threshold();

    let corpus = accepted_set(base, level, &scenario.universe).unwrap();
    let within_all_accepted = scenario.universe.sentences()[1..=n]
        .iter()
        .all(|w| corpus.contains(w));

    let report_out = corpus_report_with(
        base,
        level,
        &scenario.universe,
        ReportOptions { max_cores: 0, extend_universe: false },
    )
    .unwrap();

    let errs_3 = scenario.universe.sentences().last().unwrap();
    let all_within = &scenario.universe.sentences()[n + 1];
    let sp_err = serious_possibility_in(base, &corpus, errs_3).unwrap();
    let sp_all = serious_possibility_in(base, &corpus, all_within).unwrap();

    report(
        7,
        within_all_accepted
            && se_accepted
            && lower_matches
            && !report_out.jointly_consistent
            && !sp_err
            && !sp_all,
        &format!(
            "N=10^4: some_error lower {:.12} vs oracle {:.12}, corpus inconsistent, both serious-possibility tests false",
            iv_se.lower, oracle_lower
        ),
    );
}

#[test]
fn criterion_8_expected_utility() {
    let level = AcceptanceLevel::new(0.01).unwrap();
    let cmp = expected_utility_comparison(10, 0.25, 5.0, 1.0, level).unwrap();
    let exact = cmp.eu_probabilistic == 35.0
        && cmp.eu_acceptance == 0.0
        && cmp.probabilistic_decision == PolicyDecision::Use
        && cmp.acceptance_decision == PolicyDecision::Discard;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(1..1000usize);
        let p = rng.gen_range(0.001..0.999f64);
        let gain = rng.gen_range(0.01..100.0f64);
        let loss = rng.gen_range(0.01..100.0f64);
        let eps = rng.gen_range(0.011..0.489f64);
        let c =
            expected_utility_comparison(n, p, gain, loss, AcceptanceLevel::new(eps).unwrap())
                .unwrap();
        if c.eu_probabilistic < c.eu_acceptance {
            violations += 1;
        }
    }
    report(
        8,
        exact && violations == 0,
        &format!(
            "eu_probabilistic={} eu_acceptance={}, {violations} dominance violations in 1000 draws",
            cmp.eu_probabilistic, cmp.eu_acceptance
        ),
    );
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: u32, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        return Formula::Atom(Atom::new(rng.gen_range(0..atoms), vec![]));
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, atoms, depth - 1)),
        1 => Formula::and(
            (0..rng.gen_range(2..4))
                .map(|_| random_formula(rng, atoms, depth - 1))
                .collect(),
        ),
        2 => Formula::or(
            (0..rng.gen_range(2..4))
                .map(|_| random_formula(rng, atoms, depth - 1))
                .collect(),
        ),
        _ => Formula::implies(
            random_formula(rng, atoms, depth - 1),
            random_formula(rng, atoms, depth - 1),
        ),
    }
}

#[test]
fn criterion_9_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disagreements = 0usize;
    let trials = 500;
    for _ in 0..trials {
        let atoms = rng.gen_range(2..=12u32); // well under the 20-atom oracle cap
        let theory: Theory = (0..rng.gen_range(1..6))
            .map(|_| random_formula(&mut rng, atoms, 3))
            .collect();
        let goal = random_formula(&mut rng, atoms, 3);
        let fast_c = solver::consistent(&theory, DEFAULT_ATOM_BUDGET).unwrap();
        let slow_c = oracle::consistent(&theory).unwrap();
        let fast_e = solver::entails(&theory, &goal, DEFAULT_ATOM_BUDGET).unwrap();
        let slow_e = oracle::entails(&theory, &goal).unwrap();
        if fast_c != slow_c || fast_e != slow_e {
            disagreements += 1;
        }
    }
    report(
        9,
        disagreements == 0,
        &format!("{disagreements} disagreements across {trials} random theories"),
    );
}
