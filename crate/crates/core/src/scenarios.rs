//! Parameterized builders for the canonical worked examples, each
//! returning evidence-base stages, a query universe, rival-system inputs,
//! and a machine-checkable manifest of expected outcomes; plus the
//! analytic expected-utility comparison of the two decision policies.

use std::collections::BTreeSet;

use crate::acceptance::{
    accepted_set, corpus_report_with, serious_possibility_in, AcceptanceLevel, Corpus,
    CorpusReport, ReportOptions, Universe,
};
use crate::error::{Error, Result};
use crate::evidence::{EvidenceBase, ProbabilityInterval, StatisticalStatement};
use crate::ep::evidential_probability;
use crate::logic::parser::{parse_formula, parse_program, Program};
use crate::logic::solver::DEFAULT_ATOM_BUDGET;
use crate::logic::{Atom, Formula, OpenAtom, OpenFormula, Signature, Term};
use crate::rivals::{
    compute_extensions, mh_derive, replay_trace, DefaultRule, DefaultTheory, MhSentence,
};

/// Numeric renderings of the scenarios' qualitative frequencies, fixed in
/// one place. Override per build via [`ScenarioTuning`].
pub mod numbers {
    /// "almost all birds fly"
    pub const BIRD_FLIES_LOWER: f64 = 0.95;
    /// "most quakers are pacifists" / "most republicans are not"
    pub const NIXON_LOWER: f64 = 0.9;
    /// married/employed people live in the corresponding town
    pub const COHABITATION_LOWER: f64 = 0.99;
}

/// Optional overrides for the fixed frequency renderings and thresholds.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScenarioTuning {
    pub bird_flies_lower: Option<f64>,
    pub nixon_lower: Option<f64>,
    pub cohabitation_lower: Option<f64>,
    pub epsilon: Option<f64>,
}

/// Which worked example to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioName {
    Tweety,
    Nixon,
    Cohabitation,
    Lottery { n: usize },
    Measurement { n: usize, tolerance: f64, error_prob: f64 },
}

/// One evidence-base snapshot in a scenario's evolution.
#[derive(Debug, Clone)]
pub struct Stage {
    pub label: String,
    pub base: EvidenceBase,
}

/// Inputs for the operator-rule rival engine.
#[derive(Debug, Clone)]
pub struct MhSetup {
    pub sigma0: Vec<MhSentence>,
    pub rules: BTreeSet<u8>,
    pub goals: Vec<MhSentence>,
    pub step_bound: usize,
    /// Goal whose pursuit with rule 6 enabled exhibits the plain
    /// contradiction.
    pub contradiction_goal: Option<MhSentence>,
}

/// The measurement batch model; the independence assumption behind
/// `(1 − p)^N` lives here and nowhere else — it is written down as an
/// explicit batch statistical statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    pub n: usize,
    pub tolerance: f64,
    pub error_prob: f64,
}

impl MeasurementModel {
    /// `1 − (1 − p)^N`, the lower frequency of the batch containing at
    /// least one out-of-tolerance measurement.
    pub fn some_error_lower(&self) -> f64 {
        1.0 - (1.0 - self.error_prob).powi(self.n as i32)
    }
}

/// A machine-checkable expected outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifestEntry {
    Accepted { stage: usize, sentence: Formula, expected: bool },
    Interval { stage: usize, sentence: Formula, expected: ProbabilityInterval },
    AcceptedCount { stage: usize, expected: usize },
    DiffAdded { from: usize, to: usize, sentence: Formula },
    DiffRetracted { from: usize, to: usize, sentence: Formula },
    JointlyConsistent { stage: usize, expected: bool },
    SingleCoreOfSize { stage: usize, expected: usize },
    NoSinglePremiseViolations { stage: usize },
    /// The sentence is a universe conjunction whose conjuncts are all
    /// accepted while it is not.
    ConjunctionNotClosed { stage: usize, sentence: Formula },
    SeriousPossibility { stage: usize, sentence: Formula, expected: bool },
    ExtensionCount { expected: usize },
    ExtensionsEachOfSize { expected: usize },
    /// All MH goals derived and the trace replays.
    MhGoalsDerived,
    /// Enabling rule 6 on the contradiction goal flags a plain
    /// contradiction.
    MhRule6Contradiction,
}

/// One checked manifest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestOutcome {
    pub description: String,
    pub pass: bool,
}

/// A complete worked example: stages, universe, rival inputs, manifest.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub epsilon: f64,
    pub stages: Vec<Stage>,
    pub universe: Universe,
    pub defaults: Option<DefaultTheory>,
    pub mh: Option<MhSetup>,
    pub measurement: Option<MeasurementModel>,
    pub manifest: Vec<ManifestEntry>,
}

impl Scenario {
    pub fn signature(&self) -> &Signature {
        self.stages[0].base.signature()
    }

    /// The knowledge base of one stage in the shared text grammar.
    pub fn export_stage(&self, stage: usize) -> String {
        self.stages[stage].base.export()
    }
}

pub fn build_scenario(name: ScenarioName) -> Result<Scenario> {
    build_scenario_with(name, ScenarioTuning::default())
}

pub fn build_scenario_with(name: ScenarioName, tuning: ScenarioTuning) -> Result<Scenario> {
    match name {
        ScenarioName::Tweety => build_tweety(&tuning),
        ScenarioName::Nixon => build_nixon(&tuning),
        ScenarioName::Cohabitation => build_cohabitation(&tuning),
        ScenarioName::Lottery { n } => build_lottery(n, &tuning),
        ScenarioName::Measurement { n, tolerance, error_prob } => {
            build_measurement(n, tolerance, error_prob, &tuning)
        }
    }
}

fn stage_from_text(label: &str, text: &str, budget: usize) -> Result<Stage> {
    let prog = parse_program(text)?;
    Ok(Stage {
        label: label.to_string(),
        base: EvidenceBase::from_program(&prog, budget)?,
    })
}

fn fml(base: &EvidenceBase, text: &str) -> Result<Formula> {
    let mut sig = (**base.signature()).clone();
    parse_formula(text, &mut sig)
}

fn build_tweety(tuning: &ScenarioTuning) -> Result<Scenario> {
    let lower = tuning.bird_flies_lower.unwrap_or(numbers::BIRD_FLIES_LOWER);
    let epsilon = tuning.epsilon.unwrap_or(1.0 - lower);
    let head = format!(
        "const tweety, other.\n\
         rule all x: penguin(x) -> bird(x).\n\
         rule all x: penguin(x) -> ~flies(x).\n\
         stat x: flies(x) | bird(x) in [{lower}, 1.0].\n"
    );
    let stages = vec![
        stage_from_text("background", &head, DEFAULT_ATOM_BUDGET)?,
        stage_from_text(
            "bird",
            &format!("{head}fact bird(tweety).\n"),
            DEFAULT_ATOM_BUDGET,
        )?,
        stage_from_text(
            "penguin",
            &format!("{head}fact bird(tweety).\nfact penguin(tweety).\n"),
            DEFAULT_ATOM_BUDGET,
        )?,
    ];
    let b = &stages[0].base;
    let flies = fml(b, "flies(tweety)")?;
    let not_flies = fml(b, "~flies(tweety)")?;
    let bird = fml(b, "bird(tweety)")?;
    let penguin = fml(b, "penguin(tweety)")?;
    let universe = Universe::new(
        "tweety",
        [flies.clone(), not_flies.clone(), bird, penguin.clone()],
    );
    let stat_interval = ProbabilityInterval::new(lower, 1.0)?;
    let manifest = vec![
        ManifestEntry::Accepted { stage: 0, sentence: flies.clone(), expected: false },
        ManifestEntry::Accepted { stage: 1, sentence: flies.clone(), expected: true },
        ManifestEntry::Interval { stage: 1, sentence: flies.clone(), expected: stat_interval },
        ManifestEntry::Accepted { stage: 2, sentence: flies.clone(), expected: false },
        ManifestEntry::Interval {
            stage: 2,
            sentence: flies.clone(),
            expected: ProbabilityInterval::IMPOSSIBLE,
        },
        ManifestEntry::Accepted { stage: 2, sentence: not_flies.clone(), expected: true },
        ManifestEntry::Interval {
            stage: 2,
            sentence: not_flies.clone(),
            expected: ProbabilityInterval::CERTAIN,
        },
        ManifestEntry::DiffRetracted { from: 1, to: 2, sentence: flies.clone() },
        ManifestEntry::DiffAdded { from: 1, to: 2, sentence: not_flies },
        ManifestEntry::DiffAdded { from: 1, to: 2, sentence: penguin },
        ManifestEntry::JointlyConsistent { stage: 2, expected: true },
        ManifestEntry::ExtensionCount { expected: 1 },
        ManifestEntry::ExtensionsEachOfSize { expected: 0 },
    ];
    // rival reading of stage 2: the flying default is blocked outright
    let defaults = DefaultTheory {
        background: stages[2].base.certain().clone(),
        defaults: vec![DefaultRule {
            prerequisite: Some(fml(b, "bird(tweety)")?),
            justifications: vec![flies.clone()],
            consequent: flies,
        }],
    };
    Ok(Scenario {
        name: "tweety".into(),
        epsilon,
        stages,
        universe,
        defaults: Some(defaults),
        mh: None,
        measurement: None,
        manifest,
    })
}

fn build_nixon(tuning: &ScenarioTuning) -> Result<Scenario> {
    let lower = tuning.nixon_lower.unwrap_or(numbers::NIXON_LOWER);
    let epsilon = tuning.epsilon.unwrap_or(1.0 - lower);
    let head = format!(
        "const nixon, smith.\n\
         stat x: pacifist(x) | quaker(x) in [{lower}, 1.0].\n\
         stat x: ~pacifist(x) | republican(x) in [{lower}, 1.0].\n"
    );
    let stages = vec![
        stage_from_text("background", &head, DEFAULT_ATOM_BUDGET)?,
        stage_from_text(
            "quaker",
            &format!("{head}fact quaker(nixon).\n"),
            DEFAULT_ATOM_BUDGET,
        )?,
        stage_from_text(
            "republican",
            &format!("{head}fact republican(nixon).\n"),
            DEFAULT_ATOM_BUDGET,
        )?,
        stage_from_text(
            "combined",
            &format!("{head}fact quaker(nixon).\nfact republican(nixon).\n"),
            DEFAULT_ATOM_BUDGET,
        )?,
    ];
    let b = &stages[0].base;
    let pac = fml(b, "pacifist(nixon)")?;
    let not_pac = fml(b, "~pacifist(nixon)")?;
    let universe = Universe::new(
        "nixon",
        [
            pac.clone(),
            not_pac.clone(),
            fml(b, "quaker(nixon)")?,
            fml(b, "republican(nixon)")?,
        ],
    );
    let manifest = vec![
        ManifestEntry::Accepted { stage: 1, sentence: pac.clone(), expected: true },
        ManifestEntry::Interval {
            stage: 1,
            sentence: pac.clone(),
            expected: ProbabilityInterval::new(lower, 1.0)?,
        },
        ManifestEntry::Accepted { stage: 2, sentence: not_pac.clone(), expected: true },
        ManifestEntry::Accepted { stage: 3, sentence: pac.clone(), expected: false },
        ManifestEntry::Accepted { stage: 3, sentence: not_pac, expected: false },
        ManifestEntry::Interval {
            stage: 3,
            sentence: pac.clone(),
            expected: ProbabilityInterval::VACUOUS,
        },
        ManifestEntry::DiffRetracted { from: 1, to: 3, sentence: pac },
        ManifestEntry::JointlyConsistent { stage: 3, expected: true },
    ];
    Ok(Scenario {
        name: "nixon".into(),
        epsilon,
        stages,
        universe,
        defaults: None,
        mh: None,
        measurement: None,
        manifest,
    })
}

fn build_cohabitation(tuning: &ScenarioTuning) -> Result<Scenario> {
    let lower = tuning
        .cohabitation_lower
        .unwrap_or(numbers::COHABITATION_LOWER);
    let epsilon = tuning.epsilon.unwrap_or(1.0 - lower);
    let text = format!(
        "const john, smith.\n\
         rule all x: ht_toronto(x) -> ~ht_vancouver(x).\n\
         stat x: ht_toronto(x) | married(x) in [{lower}, 1.0].\n\
         stat x: ht_vancouver(x) | employed(x) in [{lower}, 1.0].\n\
         fact married(john).\n\
         fact employed(john).\n\
         default married(john) : M ht_toronto(john) / ht_toronto(john).\n\
         default employed(john) : M ht_vancouver(john) / ht_vancouver(john).\n"
    );
    let prog = parse_program(&text)?;
    let base = EvidenceBase::from_program(&prog, DEFAULT_ATOM_BUDGET)?;
    let defaults = DefaultTheory {
        background: base.certain().clone(),
        defaults: prog.defaults.clone(),
    };
    let disj = fml(&base, "ht_toronto(john) v ht_vancouver(john)")?;
    let toronto = fml(&base, "ht_toronto(john)")?;
    let vancouver = fml(&base, "ht_vancouver(john)")?;
    let universe = Universe::new(
        "cohabitation",
        [
            disj.clone(),
            toronto.clone(),
            vancouver.clone(),
            fml(&base, "married(john)")?,
            fml(&base, "employed(john)")?,
        ],
    );
    let manifest = vec![
        ManifestEntry::Accepted { stage: 0, sentence: disj.clone(), expected: true },
        ManifestEntry::Interval {
            stage: 0,
            sentence: disj,
            expected: ProbabilityInterval::new(lower, 1.0)?,
        },
        ManifestEntry::Accepted { stage: 0, sentence: toronto.clone(), expected: false },
        ManifestEntry::Accepted { stage: 0, sentence: vancouver, expected: false },
        ManifestEntry::Interval {
            stage: 0,
            sentence: toronto,
            expected: ProbabilityInterval::VACUOUS,
        },
        ManifestEntry::JointlyConsistent { stage: 0, expected: true },
        ManifestEntry::ExtensionCount { expected: 2 },
        ManifestEntry::ExtensionsEachOfSize { expected: 1 },
    ];
    Ok(Scenario {
        name: "cohabitation".into(),
        epsilon,
        stages: vec![Stage { label: "full".into(), base }],
        universe,
        defaults: Some(defaults),
        mh: None,
        measurement: None,
        manifest,
    })
}

/// Bound under which the exhaustive extension enumeration is listed in the
/// manifest (the generator-set guess space is 2^n).
const LOTTERY_EXTENSION_LIMIT: usize = 6;
/// Bound under which the per-ticket defaults are attached at all.
const LOTTERY_DEFAULT_LIMIT: usize = crate::rivals::MAX_DEFAULTS;
/// Bound under which a minimal inconsistent core is extracted (shrinking
/// is quadratic in the corpus size).
const LOTTERY_CORE_LIMIT: usize = 100;

fn build_lottery(n: usize, tuning: &ScenarioTuning) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::InvalidScenario(format!(
            "lottery needs at least 2 tickets, got {n}"
        )));
    }
    let q = (n as f64 - 1.0) / n as f64;
    // 1 − (1 − q) recovers q exactly in floating point, so the per-ticket
    // interval sits right on the threshold for small n; n = 2 would need
    // ε = 0.5, outside the valid range, so its tickets stay unaccepted
    let epsilon = tuning
        .epsilon
        .unwrap_or(if n >= 20 { 0.05 } else if n == 2 { 0.25 } else { 1.0 - q });
    let level = AcceptanceLevel::new(epsilon)?;
    let budget = DEFAULT_ATOM_BUDGET.max(2 * n + 64);

    let mut sig = Signature::new();
    let ticket = sig.add_predicate("ticket", 1)?;
    let wins = sig.add_predicate("wins", 1)?;
    let mut win_atoms = Vec::with_capacity(n);
    let mut facts = Vec::new();
    for i in 1..=n {
        let c = sig.add_constant(&format!("t{i}"));
        win_atoms.push(Formula::Atom(Atom::new(wins, vec![c])));
        facts.push(Formula::Atom(Atom::new(ticket, vec![c])));
    }
    let some_wins = Formula::or(win_atoms.clone());
    let all_lose = Formula::and(win_atoms.iter().cloned().map(Formula::not).collect());
    let mut pairwise = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairwise.push(Formula::not(Formula::and(vec![
                win_atoms[i].clone(),
                win_atoms[j].clone(),
            ])));
        }
    }
    facts.push(some_wins.clone());
    facts.extend(pairwise.iter().cloned());
    let stat = StatisticalStatement {
        variable: "x".into(),
        target: OpenFormula::Not(Box::new(OpenFormula::Atom(OpenAtom {
            pred: wins,
            args: vec![Term::Var],
        }))),
        reference: OpenFormula::Atom(OpenAtom { pred: ticket, args: vec![Term::Var] }),
        interval: ProbabilityInterval::point(q)?,
    };
    let prog = Program {
        signature: sig,
        theory: facts.iter().cloned().collect(),
        facts,
        rules: Vec::new(),
        stats: vec![stat],
        defaults: Vec::new(),
    };
    let base = EvidenceBase::from_program(&prog, budget)?;

    let loses: Vec<Formula> = win_atoms.iter().cloned().map(Formula::not).collect();
    let mut universe_sentences = loses.clone();
    universe_sentences.push(some_wins.clone());
    universe_sentences.push(all_lose.clone());
    let universe = Universe::new("lottery", universe_sentences);

    let loses_accepted = q >= level.threshold();
    let mut manifest = vec![
        ManifestEntry::Interval {
            stage: 0,
            sentence: loses[0].clone(),
            expected: ProbabilityInterval::point(q)?,
        },
        ManifestEntry::Accepted { stage: 0, sentence: loses[0].clone(), expected: loses_accepted },
        ManifestEntry::Accepted { stage: 0, sentence: some_wins.clone(), expected: true },
        ManifestEntry::Interval {
            stage: 0,
            sentence: some_wins.clone(),
            expected: ProbabilityInterval::CERTAIN,
        },
        ManifestEntry::Accepted { stage: 0, sentence: all_lose.clone(), expected: false },
        ManifestEntry::Interval {
            stage: 0,
            sentence: all_lose.clone(),
            expected: ProbabilityInterval::IMPOSSIBLE,
        },
        ManifestEntry::JointlyConsistent { stage: 0, expected: !loses_accepted },
        ManifestEntry::NoSinglePremiseViolations { stage: 0 },
    ];
    if loses_accepted {
        manifest.push(ManifestEntry::AcceptedCount { stage: 0, expected: n + 1 });
        manifest.push(ManifestEntry::ConjunctionNotClosed { stage: 0, sentence: all_lose.clone() });
        if n <= LOTTERY_CORE_LIMIT {
            manifest.push(ManifestEntry::SingleCoreOfSize { stage: 0, expected: n + 1 });
        }
    }

    let defaults = (n <= LOTTERY_DEFAULT_LIMIT).then(|| DefaultTheory {
        background: base.certain().clone(),
        defaults: loses
            .iter()
            .map(|l| DefaultRule {
                prerequisite: None,
                justifications: vec![l.clone()],
                consequent: l.clone(),
            })
            .collect(),
    });
    if n <= LOTTERY_EXTENSION_LIMIT {
        manifest.push(ManifestEntry::ExtensionCount { expected: n });
        manifest.push(ManifestEntry::ExtensionsEachOfSize { expected: n - 1 });
    }

    let mh = (n <= LOTTERY_EXTENSION_LIMIT).then(|| {
        let mut sigma0 = vec![MhSentence::plain(some_wins.clone())];
        sigma0.extend(pairwise.iter().cloned().map(MhSentence::plain));
        sigma0.extend(loses.iter().cloned().map(MhSentence::normally));
        MhSetup {
            sigma0,
            rules: [1u8, 2, 3, 4, 5].into_iter().collect(),
            goals: vec![
                MhSentence::probably(all_lose.clone()),
                MhSentence::probably(Formula::not(all_lose.clone())),
            ],
            step_bound: 50,
            contradiction_goal: Some(MhSentence::plain(all_lose.clone())),
        }
    });
    if mh.is_some() {
        manifest.push(ManifestEntry::MhGoalsDerived);
        manifest.push(ManifestEntry::MhRule6Contradiction);
    }

    Ok(Scenario {
        name: format!("lottery({n})"),
        epsilon,
        stages: vec![Stage { label: "lottery".into(), base }],
        universe,
        defaults,
        mh,
        measurement: None,
        manifest,
    })
}

fn build_measurement(
    n: usize,
    tolerance: f64,
    error_prob: f64,
    tuning: &ScenarioTuning,
) -> Result<Scenario> {
    if n < 1 || !(error_prob > 0.0 && error_prob < 1.0) || !(tolerance > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "measurement needs n >= 1, 0 < p < 1, tolerance > 0 (got n={n}, p={error_prob}, tolerance={tolerance})"
        )));
    }
    let model = MeasurementModel { n, tolerance, error_prob };
    let within_lower = 1.0 - error_prob;
    let some_error_lower = model.some_error_lower();
    let epsilon = tuning.epsilon.unwrap_or(0.01);
    let level = AcceptanceLevel::new(epsilon)?;
    let budget = DEFAULT_ATOM_BUDGET.max(2 * n + 64);

    let mut sig = Signature::new();
    let msmt = sig.add_predicate("msmt", 1)?;
    let within = sig.add_predicate("within", 1)?;
    let batch = sig.add_predicate("batch", 1)?;
    let some_error_p = sig.add_predicate("some_error", 1)?;
    let mut within_atoms = Vec::with_capacity(n);
    let mut facts = Vec::new();
    for i in 1..=n {
        let c = sig.add_constant(&format!("m{i}"));
        within_atoms.push(Formula::Atom(Atom::new(within, vec![c])));
        facts.push(Formula::Atom(Atom::new(msmt, vec![c])));
    }
    let b = sig.add_constant("b");
    let se = Formula::Atom(Atom::new(some_error_p, vec![b]));
    facts.push(Formula::Atom(Atom::new(batch, vec![b])));
    // some_error(b) <-> ~(within_1 & ... & within_n)
    let mut fwd = vec![Formula::not(se.clone())];
    fwd.extend(within_atoms.iter().cloned().map(Formula::not));
    facts.push(Formula::or(fwd));
    facts.push(Formula::or(vec![
        se.clone(),
        Formula::and(within_atoms.clone()),
    ]));

    let stats = vec![
        StatisticalStatement {
            variable: "x".into(),
            target: OpenFormula::Atom(OpenAtom { pred: within, args: vec![Term::Var] }),
            reference: OpenFormula::Atom(OpenAtom { pred: msmt, args: vec![Term::Var] }),
            interval: ProbabilityInterval::new(within_lower, 1.0)?,
        },
        StatisticalStatement {
            variable: "x".into(),
            target: OpenFormula::Atom(OpenAtom { pred: some_error_p, args: vec![Term::Var] }),
            reference: OpenFormula::Atom(OpenAtom { pred: batch, args: vec![Term::Var] }),
            interval: ProbabilityInterval::new(some_error_lower, 1.0)?,
        },
    ];
    let prog = Program {
        signature: sig,
        theory: facts.iter().cloned().collect(),
        facts,
        rules: Vec::new(),
        stats,
        defaults: Vec::new(),
    };
    let base = EvidenceBase::from_program(&prog, budget)?;

    let all_within = Formula::and(within_atoms.clone());
    let probe = n.min(3) - 1; // "measurement 3 errs", or the last one below n=3
    let errs_probe = Formula::not(within_atoms[probe].clone());
    let mut universe_sentences = vec![se.clone()];
    universe_sentences.extend(within_atoms.iter().cloned());
    if n >= 2 {
        universe_sentences.push(all_within.clone());
    }
    universe_sentences.push(errs_probe.clone());
    let universe = Universe::new("measurement", universe_sentences);

    let within_accepted = within_lower >= level.threshold();
    let se_accepted = some_error_lower >= level.threshold();
    let paradoxical = within_accepted && se_accepted;
    let mut manifest = vec![
        ManifestEntry::Interval {
            stage: 0,
            sentence: within_atoms[0].clone(),
            expected: ProbabilityInterval::new(within_lower, 1.0)?,
        },
        ManifestEntry::Accepted {
            stage: 0,
            sentence: within_atoms[probe].clone(),
            expected: within_accepted,
        },
        ManifestEntry::Interval {
            stage: 0,
            sentence: se.clone(),
            expected: ProbabilityInterval::new(some_error_lower, 1.0)?,
        },
        ManifestEntry::Accepted { stage: 0, sentence: se.clone(), expected: se_accepted },
        ManifestEntry::JointlyConsistent { stage: 0, expected: !paradoxical },
        ManifestEntry::NoSinglePremiseViolations { stage: 0 },
    ];
    if paradoxical {
        manifest.push(ManifestEntry::AcceptedCount { stage: 0, expected: n + 1 });
        manifest.push(ManifestEntry::SeriousPossibility {
            stage: 0,
            sentence: errs_probe,
            expected: false,
        });
        if n >= 2 {
            manifest.push(ManifestEntry::SeriousPossibility {
                stage: 0,
                sentence: all_within.clone(),
                expected: false,
            });
            manifest.push(ManifestEntry::ConjunctionNotClosed { stage: 0, sentence: all_within });
        }
    }

    Ok(Scenario {
        name: format!("measurement({n},{tolerance},{error_prob})"),
        epsilon,
        stages: vec![Stage { label: "batch".into(), base }],
        universe,
        defaults: None,
        mh: None,
        measurement: Some(model),
        manifest,
    })
}

/// Truncated one-line rendering for manifest descriptions (the lottery and
/// measurement conjunctions are thousands of characters long).
fn short(sig: &Signature, f: &Formula) -> String {
    let s = f.display(sig);
    if s.len() > 48 {
        format!("{}...", &s[..48])
    } else {
        s
    }
}

/// Runs every engine a scenario's manifest refers to and checks each entry,
/// in manifest order.
pub fn check_manifest(scenario: &Scenario) -> Result<Vec<ManifestOutcome>> {
    let level = AcceptanceLevel::new(scenario.epsilon)?;
    let sig = scenario.signature();
    let n_stages = scenario.stages.len();
    let mut corpora: Vec<Option<Corpus>> = vec![None; n_stages];
    let mut reports: Vec<Option<CorpusReport>> = vec![None; n_stages];
    // core extraction is quadratic; only pay for it where an entry asks
    let mut needs_cores = vec![false; n_stages];
    for e in &scenario.manifest {
        if let ManifestEntry::SingleCoreOfSize { stage, .. } = e {
            needs_cores[*stage] = true;
        }
    }

    let mut extensions = None;
    let mut mh_trace = None;
    let mut outcomes = Vec::new();
    for entry in &scenario.manifest {
        let outcome = match entry {
            ManifestEntry::Accepted { stage, sentence, expected } => {
                let (iv, _) = evidential_probability(&scenario.stages[*stage].base, sentence)?;
                let got = iv.lower >= level.threshold();
                ManifestOutcome {
                    description: format!(
                        "stage {stage} {} {}",
                        if *expected { "accepts" } else { "rejects" },
                        short(sig, sentence)
                    ),
                    pass: got == *expected,
                }
            }
            ManifestEntry::Interval { stage, sentence, expected } => {
                let (iv, _) = evidential_probability(&scenario.stages[*stage].base, sentence)?;
                ManifestOutcome {
                    description: format!(
                        "stage {stage} P({}) = {expected}",
                        short(sig, sentence)
                    ),
                    pass: iv == *expected,
                }
            }
            ManifestEntry::AcceptedCount { stage, expected } => {
                let corpus = corpus_at(scenario, level, &mut corpora, *stage)?;
                ManifestOutcome {
                    description: format!("stage {stage} corpus has {expected} entries"),
                    pass: corpus.entries.len() == *expected,
                }
            }
            ManifestEntry::DiffAdded { from, to, sentence } => {
                let pass = {
                    let before = corpus_at(scenario, level, &mut corpora, *from)?.contains(sentence);
                    let after = corpus_at(scenario, level, &mut corpora, *to)?.contains(sentence);
                    !before && after
                };
                ManifestOutcome {
                    description: format!(
                        "stage {from} -> {to} adds {}",
                        short(sig, sentence)
                    ),
                    pass,
                }
            }
            ManifestEntry::DiffRetracted { from, to, sentence } => {
                let pass = {
                    let before = corpus_at(scenario, level, &mut corpora, *from)?.contains(sentence);
                    let after = corpus_at(scenario, level, &mut corpora, *to)?.contains(sentence);
                    before && !after
                };
                ManifestOutcome {
                    description: format!(
                        "stage {from} -> {to} retracts {}",
                        short(sig, sentence)
                    ),
                    pass,
                }
            }
            ManifestEntry::JointlyConsistent { stage, expected } => {
                let report = report_at(scenario, level, &mut reports, *stage, needs_cores[*stage])?;
                ManifestOutcome {
                    description: format!("stage {stage} corpus jointly consistent = {expected}"),
                    pass: report.jointly_consistent == *expected,
                }
            }
            ManifestEntry::SingleCoreOfSize { stage, expected } => {
                let report = report_at(scenario, level, &mut reports, *stage, true)?;
                ManifestOutcome {
                    description: format!("stage {stage} one minimal core of size {expected}"),
                    pass: report.cores.len() == 1 && report.cores[0].len() == *expected,
                }
            }
            ManifestEntry::NoSinglePremiseViolations { stage } => {
                let report = report_at(scenario, level, &mut reports, *stage, needs_cores[*stage])?;
                ManifestOutcome {
                    description: format!("stage {stage} no single-premise closure violations"),
                    pass: report.single_premise_violations.is_empty(),
                }
            }
            ManifestEntry::ConjunctionNotClosed { stage, sentence } => {
                let report = report_at(scenario, level, &mut reports, *stage, needs_cores[*stage])?;
                let norm = sentence.normalize();
                ManifestOutcome {
                    description: format!(
                        "stage {stage} conjunction {} escapes closure",
                        short(sig, sentence)
                    ),
                    pass: report
                        .conjunction_closure_violations
                        .iter()
                        .any(|f| f.normalize() == norm),
                }
            }
            ManifestEntry::SeriousPossibility { stage, sentence, expected } => {
                let base = &scenario.stages[*stage].base;
                let pass = {
                    let corpus = corpus_at(scenario, level, &mut corpora, *stage)?;
                    serious_possibility_in(base, corpus, sentence)? == *expected
                };
                ManifestOutcome {
                    description: format!(
                        "stage {stage} serious_possibility({}) = {expected}",
                        short(sig, sentence)
                    ),
                    pass,
                }
            }
            ManifestEntry::ExtensionCount { expected } => {
                let exts = extensions_of(scenario, &mut extensions)?;
                ManifestOutcome {
                    description: format!("{expected} default-logic extensions"),
                    pass: exts.len() == *expected,
                }
            }
            ManifestEntry::ExtensionsEachOfSize { expected } => {
                let exts = extensions_of(scenario, &mut extensions)?;
                ManifestOutcome {
                    description: format!("every extension generated by {expected} consequents"),
                    pass: exts.iter().all(|e| e.consequents.len() == *expected),
                }
            }
            ManifestEntry::MhGoalsDerived => {
                let setup = scenario
                    .mh
                    .as_ref()
                    .ok_or_else(|| Error::InvalidScenario("no MH setup".into()))?;
                let budget = scenario.stages[0].base.atom_budget();
                if mh_trace.is_none() {
                    mh_trace = Some(mh_derive(
                        &setup.sigma0,
                        &setup.rules,
                        &setup.goals,
                        setup.step_bound,
                        budget,
                    )?);
                }
                let trace = mh_trace.as_ref().unwrap();
                let derived = trace.goals.iter().all(|(_, step)| step.is_some());
                let replays = replay_trace(trace, &setup.sigma0, &setup.rules, budget)?;
                ManifestOutcome {
                    description: format!(
                        "operator rules derive all {} goals and the trace replays",
                        setup.goals.len()
                    ),
                    pass: derived && replays,
                }
            }
            ManifestEntry::MhRule6Contradiction => {
                let setup = scenario
                    .mh
                    .as_ref()
                    .ok_or_else(|| Error::InvalidScenario("no MH setup".into()))?;
                let goal = setup
                    .contradiction_goal
                    .clone()
                    .ok_or_else(|| Error::InvalidScenario("no rule-6 goal".into()))?;
                let mut rules = setup.rules.clone();
                rules.insert(6);
                let trace = mh_derive(
                    &setup.sigma0,
                    &rules,
                    std::slice::from_ref(&goal),
                    setup.step_bound,
                    scenario.stages[0].base.atom_budget(),
                )?;
                ManifestOutcome {
                    description: "rule 6 flags a plain contradiction".into(),
                    pass: trace.inconsistency_detected,
                }
            }
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

fn corpus_at<'a>(
    scenario: &Scenario,
    level: AcceptanceLevel,
    cache: &'a mut Vec<Option<Corpus>>,
    stage: usize,
) -> Result<&'a Corpus> {
    if cache[stage].is_none() {
        cache[stage] = Some(accepted_set(
            &scenario.stages[stage].base,
            level,
            &scenario.universe,
        )?);
    }
    Ok(cache[stage].as_ref().unwrap())
}

fn report_at<'a>(
    scenario: &Scenario,
    level: AcceptanceLevel,
    cache: &'a mut Vec<Option<CorpusReport>>,
    stage: usize,
    with_cores: bool,
) -> Result<&'a CorpusReport> {
    if cache[stage].is_none() {
        cache[stage] = Some(corpus_report_with(
            &scenario.stages[stage].base,
            level,
            &scenario.universe,
            ReportOptions { max_cores: if with_cores { 4 } else { 0 }, extend_universe: false },
        )?);
    }
    Ok(cache[stage].as_ref().unwrap())
}

fn extensions_of<'a>(
    scenario: &Scenario,
    cache: &'a mut Option<Vec<crate::rivals::Extension>>,
) -> Result<&'a Vec<crate::rivals::Extension>> {
    if cache.is_none() {
        let theory = scenario
            .defaults
            .as_ref()
            .ok_or_else(|| Error::InvalidScenario("no default theory".into()))?;
        *cache = Some(compute_extensions(
            theory,
            scenario.stages[0].base.atom_budget(),
        )?);
    }
    Ok(cache.as_ref().unwrap())
}

/// Which action a policy takes on each measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyDecision {
    Use,
    Discard,
}

impl std::fmt::Display for PolicyDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyDecision::Use => write!(f, "USE"),
            PolicyDecision::Discard => write!(f, "DISCARD"),
        }
    }
}

/// Totals and per-measurement decisions of the two decision policies.
#[derive(Debug, Clone, PartialEq)]
pub struct EuComparison {
    pub n: usize,
    pub error_prob: f64,
    pub gain: f64,
    pub loss: f64,
    pub epsilon: f64,
    pub acceptance_decision: PolicyDecision,
    pub probabilistic_decision: PolicyDecision,
    pub eu_acceptance: f64,
    pub eu_probabilistic: f64,
}

/// Per measurement, USE yields `(1 − p)·gain − p·loss` in expectation and
/// DISCARD yields 0. The acceptance policy plays USE iff "within tolerance"
/// clears the threshold (`1 − p ≥ 1 − ε`); the probabilistic policy plays
/// USE iff the expectation is positive. Totals are N times per-measurement.
pub fn expected_utility_comparison(
    n: usize,
    error_prob: f64,
    gain: f64,
    loss: f64,
    level: AcceptanceLevel,
) -> Result<EuComparison> {
    if !(error_prob > 0.0 && error_prob < 1.0) || !(gain > 0.0) || !(loss > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "expected-utility comparison needs 0 < p < 1 and positive gain/loss (got p={error_prob}, gain={gain}, loss={loss})"
        )));
    }
    let per_use = (1.0 - error_prob) * gain - error_prob * loss;
    let acceptance_decision = if 1.0 - error_prob >= level.threshold() {
        PolicyDecision::Use
    } else {
        PolicyDecision::Discard
    };
    let probabilistic_decision = if per_use > 0.0 {
        PolicyDecision::Use
    } else {
        PolicyDecision::Discard
    };
    let total = |d: PolicyDecision| match d {
        PolicyDecision::Use => n as f64 * per_use,
        PolicyDecision::Discard => 0.0,
    };
    Ok(EuComparison {
        n,
        error_prob,
        gain,
        loss,
        epsilon: level.epsilon(),
        acceptance_decision,
        probabilistic_decision,
        eu_acceptance: total(acceptance_decision),
        eu_probabilistic: total(probabilistic_decision),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(scenario: &Scenario) {
        let outcomes = check_manifest(scenario).unwrap();
        for o in &outcomes {
            assert!(o.pass, "failed: {}", o.description);
        }
    }

    #[test]
    fn tweety_manifest_passes() {
        all_pass(&build_scenario(ScenarioName::Tweety).unwrap());
    }

    #[test]
    fn nixon_manifest_passes() {
        all_pass(&build_scenario(ScenarioName::Nixon).unwrap());
    }

    #[test]
    fn cohabitation_manifest_passes() {
        all_pass(&build_scenario(ScenarioName::Cohabitation).unwrap());
    }

    #[test]
    fn small_lottery_manifest_passes() {
        all_pass(&build_scenario(ScenarioName::Lottery { n: 4 }).unwrap());
    }

    #[test]
    fn small_measurement_manifest_passes() {
        all_pass(
            &build_scenario(ScenarioName::Measurement {
                n: 5,
                tolerance: 0.05,
                error_prob: 0.001,
            })
            .unwrap(),
        );
    }

    #[test]
    fn small_paradoxical_measurement_passes() {
        // p and ε tuned so both the per-measurement and the batch stat
        // clear the threshold at desk scale
        let s = build_scenario_with(
            ScenarioName::Measurement { n: 10, tolerance: 0.05, error_prob: 0.49 },
            ScenarioTuning { epsilon: Some(0.49), ..Default::default() },
        )
        .unwrap();
        assert!(s
            .manifest
            .iter()
            .any(|e| matches!(e, ManifestEntry::SeriousPossibility { .. })));
        all_pass(&s);
    }

    #[test]
    fn lottery_rejects_degenerate_size() {
        assert!(matches!(
            build_scenario(ScenarioName::Lottery { n: 1 }),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn measurement_rejects_bad_probability() {
        assert!(build_scenario(ScenarioName::Measurement {
            n: 5,
            tolerance: 0.05,
            error_prob: 1.5,
        })
        .is_err());
    }

    #[test]
    fn eu_agreement_regime() {
        let level = AcceptanceLevel::new(0.01).unwrap();
        let c = expected_utility_comparison(10, 0.25, 1.0, 5.0, level).unwrap();
        assert_eq!(c.acceptance_decision, PolicyDecision::Discard);
        assert_eq!(c.probabilistic_decision, PolicyDecision::Discard);
        assert_eq!(c.eu_acceptance, 0.0);
        assert_eq!(c.eu_probabilistic, 0.0);
    }

    #[test]
    fn eu_disagreement_regime() {
        let level = AcceptanceLevel::new(0.01).unwrap();
        let c = expected_utility_comparison(10, 0.25, 5.0, 1.0, level).unwrap();
        assert_eq!(c.acceptance_decision, PolicyDecision::Discard);
        assert_eq!(c.probabilistic_decision, PolicyDecision::Use);
        assert_eq!(c.eu_acceptance, 0.0);
        assert_eq!(c.eu_probabilistic, 35.0);
    }

    #[test]
    fn eu_small_error_agreement() {
        let level = AcceptanceLevel::new(0.01).unwrap();
        let c = expected_utility_comparison(10, 0.0001, 1.0, 1.0, level).unwrap();
        assert_eq!(c.acceptance_decision, PolicyDecision::Use);
        assert_eq!(c.probabilistic_decision, PolicyDecision::Use);
        assert_eq!(c.eu_acceptance, c.eu_probabilistic);
        assert!(c.eu_probabilistic > 0.0);
    }

    #[test]
    fn stage_export_reparses() {
        let s = build_scenario(ScenarioName::Tweety).unwrap();
        let text = s.export_stage(2);
        let prog = parse_program(&text).unwrap();
        let re = EvidenceBase::from_program(&prog, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(re, s.stages[2].base);
    }
}
