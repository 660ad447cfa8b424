//! The acceptance corpus K: threshold acceptance over an explicit finite
//! query universe, non-monotonic update diffs, serious-possibility tests,
//! and corpus-structure reports.
//!
//! K is never "all sentences": deductive closure of a high-probability
//! corpus degenerates, so acceptance is always computed over a declared
//! working set and the report surfaces closure violations instead of
//! enforcing closure.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ep::{evidential_probability, EvaluationTrace};
use crate::evidence::{EvidenceBase, EvidenceItem, ProbabilityInterval};
use crate::logic::mus::minimal_inconsistent_subsets;
use crate::logic::{Atom, Formula, Theory};

/// Default acceptance threshold 1 − ε.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// The acceptance threshold behind "practically certain".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceLevel {
    epsilon: f64,
}

impl AcceptanceLevel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::BadEpsilon(epsilon));
        }
        Ok(AcceptanceLevel { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn threshold(&self) -> f64 {
        1.0 - self.epsilon
    }
}

/// A declared finite query universe, deduplicated by canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub label: String,
    sentences: Vec<Formula>,
}

impl Universe {
    pub fn new(label: impl Into<String>, sentences: impl IntoIterator<Item = Formula>) -> Self {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in sentences {
            if seen.insert(s.normalize()) {
                out.push(s);
            }
        }
        Universe { label: label.into(), sentences: out }
    }

    pub fn sentences(&self) -> &[Formula] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// One accepted sentence with its supporting interval and trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub sentence: Formula,
    pub interval: ProbabilityInterval,
    pub trace: EvaluationTrace,
}

/// The acceptance set K over a universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub epsilon: f64,
    pub universe_label: String,
}

impl Corpus {
    pub fn contains(&self, f: &Formula) -> bool {
        let n = f.normalize();
        self.entries.iter().any(|e| e.sentence.normalize() == n)
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Formula> {
        self.entries.iter().map(|e| &e.sentence)
    }
}

/// Diff between the corpora before and after an evidence update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiff {
    pub added: Vec<Formula>,
    pub retracted: Vec<Formula>,
    pub unchanged: usize,
    /// Universe sentences whose interval changed at all, for audit.
    pub interval_changed: Vec<Formula>,
}

/// `lower ≥ 1 − ε`, closed inequality.
pub fn is_accepted(base: &EvidenceBase, phi: &Formula, level: AcceptanceLevel) -> Result<bool> {
    let (iv, _) = evidential_probability(base, phi)?;
    Ok(iv.lower >= level.threshold())
}

/// The corpus: exactly the universe members passing the threshold,
/// in universe order.
pub fn accepted_set(
    base: &EvidenceBase,
    level: AcceptanceLevel,
    universe: &Universe,
) -> Result<Corpus> {
    let mut entries = Vec::new();
    for s in universe.sentences() {
        let (iv, trace) = evidential_probability(base, s)?;
        if iv.lower >= level.threshold() {
            entries.push(CorpusEntry { sentence: s.clone(), interval: iv, trace });
        }
    }
    Ok(Corpus {
        entries,
        epsilon: level.epsilon(),
        universe_label: universe.label.clone(),
    })
}

/// Asserts `new_item` and diffs the corpus before/after.
pub fn update_diff(
    base: &EvidenceBase,
    new_item: EvidenceItem,
    level: AcceptanceLevel,
    universe: &Universe,
) -> Result<UpdateDiff> {
    let before = accepted_set(base, level, universe)?;
    let after_base = base.assert_evidence(new_item)?;
    let after = accepted_set(&after_base, level, universe)?;
    let before_norms: HashSet<Formula> = before.sentences().map(|f| f.normalize()).collect();
    let after_norms: HashSet<Formula> = after.sentences().map(|f| f.normalize()).collect();
    let added = after
        .sentences()
        .filter(|f| !before_norms.contains(&f.normalize()))
        .cloned()
        .collect();
    let retracted = before
        .sentences()
        .filter(|f| !after_norms.contains(&f.normalize()))
        .cloned()
        .collect();
    let mut interval_changed = Vec::new();
    let mut unchanged = 0usize;
    for s in universe.sentences() {
        let (iv_before, _) = evidential_probability(base, s)?;
        let (iv_after, _) = evidential_probability(&after_base, s)?;
        if iv_before == iv_after {
            unchanged += 1;
        } else {
            interval_changed.push(s.clone());
        }
    }
    Ok(UpdateDiff { added, retracted, unchanged, interval_changed })
}

/// A sentence is a serious possibility unless it contradicts some single
/// corpus member (together with the certain evidence). The test is
/// member-by-member, never joint: the corpus itself may be jointly
/// inconsistent.
pub fn serious_possibility(
    base: &EvidenceBase,
    level: AcceptanceLevel,
    universe: &Universe,
    phi: &Formula,
) -> Result<bool> {
    let corpus = accepted_set(base, level, universe)?;
    serious_possibility_in(base, &corpus, phi)
}

/// Same test against an already-computed corpus.
pub fn serious_possibility_in(
    base: &EvidenceBase,
    corpus: &Corpus,
    phi: &Formula,
) -> Result<bool> {
    for entry in &corpus.entries {
        if !base.consistent_with(&[&entry.sentence, phi])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Structure report over the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub corpus: Corpus,
    /// Is the corpus, together with the certain evidence, satisfiable?
    pub jointly_consistent: bool,
    /// Minimal inconsistent cores when not (corpus sentences first, then
    /// whichever certain sentences the core needs).
    pub cores: Vec<Vec<Formula>>,
    /// Pairs (φ, ψ): φ accepted, {φ} ⊨ ψ alone, ψ in the universe but not
    /// accepted.
    pub single_premise_violations: Vec<(Formula, Formula)>,
    /// Universe conjunctions whose conjuncts are all accepted but which
    /// are not themselves accepted.
    pub conjunction_closure_violations: Vec<Formula>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    /// Cap on the number of minimal cores extracted; 0 skips extraction
    /// (joint consistency is still reported — useful at large scales where
    /// core shrinking is quadratic).
    pub max_cores: usize,
    /// Auto-extend the universe by single-premise consequences before
    /// reporting (off by default; violations are reported, not repaired).
    pub extend_universe: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { max_cores: 4, extend_universe: false }
    }
}

pub fn corpus_report(
    base: &EvidenceBase,
    level: AcceptanceLevel,
    universe: &Universe,
) -> Result<CorpusReport> {
    corpus_report_with(base, level, universe, ReportOptions::default())
}

pub fn corpus_report_with(
    base: &EvidenceBase,
    level: AcceptanceLevel,
    universe: &Universe,
    options: ReportOptions,
) -> Result<CorpusReport> {
    let mut universe = universe.clone();
    if options.extend_universe {
        universe = extend_by_single_premise(base, &universe)?;
    }
    let corpus = accepted_set(base, level, &universe)?;

    // joint consistency of K with the certain evidence; corpus sentences
    // come first so cores cite them before background axioms
    let mut combined = Theory::new();
    for e in &corpus.entries {
        combined.push(e.sentence.clone());
    }
    for s in base.certain().iter() {
        combined.push(s.clone());
    }
    let jointly_consistent = crate::logic::solver::consistent(&combined, base.atom_budget())?;
    let cores = if jointly_consistent || options.max_cores == 0 {
        Vec::new()
    } else {
        minimal_inconsistent_subsets(&combined, options.max_cores, base.atom_budget())?
    };

    let single_premise_violations =
        single_premise_scan(base, &corpus, &universe)?;

    // n-ary conjunction closure: a universe conjunction with every
    // conjunct accepted should itself be accepted
    let accepted_norms: HashSet<Formula> =
        corpus.sentences().map(|f| f.normalize()).collect();
    let mut conjunction_closure_violations = Vec::new();
    for s in universe.sentences() {
        if let Formula::And(parts) = s.normalize() {
            if parts.iter().all(|p| accepted_norms.contains(&p.normalize()))
                && !accepted_norms.contains(&s.normalize())
            {
                conjunction_closure_violations.push(s.clone());
            }
        }
    }

    Ok(CorpusReport {
        corpus,
        jointly_consistent,
        cores,
        single_premise_violations,
        conjunction_closure_violations,
    })
}

/// Finds pairs (φ accepted, ψ not accepted) with {φ} ⊨ ψ. Pure single
/// premise entailment, no evidence in the background. Pairs that share no
/// atom cannot witness a violation unless ψ is a tautology, which the
/// threshold would already have accepted; the scan skips them.
fn single_premise_scan(
    base: &EvidenceBase,
    corpus: &Corpus,
    universe: &Universe,
) -> Result<Vec<(Formula, Formula)>> {
    let accepted_norms: HashSet<Formula> =
        corpus.sentences().map(|f| f.normalize()).collect();
    let non_accepted: Vec<&Formula> = universe
        .sentences()
        .iter()
        .filter(|s| !accepted_norms.contains(&s.normalize()))
        .map(|s| s as &Formula)
        .collect();
    let mut by_atom: HashMap<Atom, Vec<usize>> = HashMap::new();
    for (i, s) in non_accepted.iter().enumerate() {
        let mut atoms = Vec::new();
        s.atoms(&mut atoms);
        for a in atoms {
            by_atom.entry(a).or_default().push(i);
        }
    }
    // group candidate pairs by consequence so each ¬ψ is clausified once;
    // {φ} ⊨ ψ then becomes an unsat test of φ against that context
    let mut premises_for: Vec<Vec<usize>> = vec![Vec::new(); non_accepted.len()];
    for (pi, phi) in corpus.sentences().enumerate() {
        let mut atoms = Vec::new();
        phi.atoms(&mut atoms);
        let mut candidates: Vec<usize> = atoms
            .iter()
            .flat_map(|a| by_atom.get(a).into_iter().flatten().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for ci in candidates {
            premises_for[ci].push(pi);
        }
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (ci, premises) in premises_for.iter().enumerate() {
        if premises.is_empty() {
            continue;
        }
        let psi = non_accepted[ci];
        let negated: Theory = std::iter::once(Formula::not((*psi).clone())).collect();
        let mut ctx = crate::logic::solver::SatContext::new(&negated, base.atom_budget())?;
        for &pi in premises {
            if !ctx.satisfiable_with(&[&corpus.entries[pi].sentence])? {
                hits.push((pi, ci));
            }
        }
    }
    // report in corpus order, consequences second
    hits.sort_unstable();
    Ok(hits
        .into_iter()
        .map(|(pi, ci)| (corpus.entries[pi].sentence.clone(), (*non_accepted[ci]).clone()))
        .collect())
}

fn extend_by_single_premise(base: &EvidenceBase, universe: &Universe) -> Result<Universe> {
    // single-premise consequences already present in the universe under a
    // different spelling are covered by dedup; here we only add the
    // disjunction-free normal forms of members, which is the cheap closure
    // the report option promises
    let mut extended: Vec<Formula> = universe.sentences().to_vec();
    for s in universe.sentences() {
        if let Formula::And(parts) = s.normalize() {
            extended.extend(parts);
        }
    }
    let _ = base;
    Ok(Universe::new(universe.label.clone(), extended))
}
