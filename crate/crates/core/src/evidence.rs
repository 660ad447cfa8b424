//! The evidence base E: certain sentences plus statistical statements,
//! with assert/retract and reference-class queries.
//!
//! The certain part must stay consistent at all times; only the acceptance
//! corpus K is allowed to be inconsistent. Asserting contradictory
//! evidence is therefore an error, not a merge.

use std::collections::HashSet;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::logic::parser::Program;
use crate::logic::solver::SatContext;
use crate::logic::{Atom, ConstId, Formula, OpenFormula, Signature, Theory, UniversalRule};

/// An interval-valued probability, `0 ≤ lower ≤ upper ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ProbabilityInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) || lower > upper {
            return Err(Error::BadInterval { lower, upper });
        }
        Ok(ProbabilityInterval { lower, upper })
    }

    pub fn point(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub const CERTAIN: ProbabilityInterval = ProbabilityInterval { lower: 1.0, upper: 1.0 };
    pub const IMPOSSIBLE: ProbabilityInterval = ProbabilityInterval { lower: 0.0, upper: 0.0 };
    pub const VACUOUS: ProbabilityInterval = ProbabilityInterval { lower: 0.0, upper: 1.0 };

    /// Does this interval contain `other` entirely?
    pub fn superset_of(&self, other: &ProbabilityInterval) -> bool {
        self.lower <= other.lower && self.upper >= other.upper
    }
}

impl std::fmt::Display for ProbabilityInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lower, self.upper)
    }
}

/// `%x(target | reference) in [l, u]`: frequency knowledge about a
/// reference class. Never used as a classical sentence in entailment.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalStatement {
    pub variable: String,
    pub target: OpenFormula,
    pub reference: OpenFormula,
    pub interval: ProbabilityInterval,
}

impl StatisticalStatement {
    pub fn display(&self, sig: &Signature) -> String {
        format!(
            "%{v}({t} | {r}) in {i}",
            v = self.variable,
            t = self.target.display(sig, &self.variable),
            r = self.reference.display(sig, &self.variable),
            i = self.interval,
        )
    }
}

/// An assertable/retractable item of evidence.
#[derive(Debug, Clone, PartialEq)]
pub enum EvidenceItem {
    Sentence(Formula),
    Stat(StatisticalStatement),
}

#[derive(Default)]
struct Caches {
    solver: Mutex<Option<SatContext>>,
    fact_norms: OnceLock<HashSet<Formula>>,
    atoms: OnceLock<HashSet<Atom>>,
}

/// The evidence base E.
pub struct EvidenceBase {
    signature: Arc<Signature>,
    certain: Theory,
    facts: Vec<Formula>,
    rules: Vec<UniversalRule>,
    stats: Vec<StatisticalStatement>,
    atom_budget: usize,
    caches: Caches,
}

impl Clone for EvidenceBase {
    fn clone(&self) -> Self {
        EvidenceBase {
            signature: self.signature.clone(),
            certain: self.certain.clone(),
            facts: self.facts.clone(),
            rules: self.rules.clone(),
            stats: self.stats.clone(),
            atom_budget: self.atom_budget,
            caches: Caches::default(),
        }
    }
}

impl PartialEq for EvidenceBase {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.certain == other.certain
            && self.stats == other.stats
            && self.atom_budget == other.atom_budget
    }
}

impl std::fmt::Debug for EvidenceBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvidenceBase")
            .field("certain", &self.certain.len())
            .field("stats", &self.stats.len())
            .field("atom_budget", &self.atom_budget)
            .finish()
    }
}

impl EvidenceBase {
    /// An empty base over a signature.
    pub fn new(signature: Arc<Signature>, atom_budget: usize) -> Self {
        EvidenceBase {
            signature,
            certain: Theory::new(),
            facts: Vec::new(),
            rules: Vec::new(),
            stats: Vec::new(),
            atom_budget,
            caches: Caches::default(),
        }
    }

    /// Builds a base from a parsed program, checking that its certain part
    /// is consistent.
    pub fn from_program(prog: &Program, atom_budget: usize) -> Result<Self> {
        let base = EvidenceBase {
            signature: Arc::new(prog.signature.clone()),
            certain: prog.theory.clone(),
            facts: prog.facts.clone(),
            rules: prog.rules.clone(),
            stats: prog.stats.clone(),
            atom_budget,
            caches: Caches::default(),
        };
        if !base.with_solver(|s| s.satisfiable())? {
            return Err(Error::InconsistentEvidence(
                "certain part of the program is inconsistent".into(),
            ));
        }
        Ok(base)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn certain(&self) -> &Theory {
        &self.certain
    }

    pub fn facts(&self) -> &[Formula] {
        &self.facts
    }

    pub fn rules(&self) -> &[UniversalRule] {
        &self.rules
    }

    pub fn stats(&self) -> &[StatisticalStatement] {
        &self.stats
    }

    pub fn atom_budget(&self) -> usize {
        self.atom_budget
    }

    fn with_solver<R>(&self, f: impl FnOnce(&mut SatContext) -> Result<R>) -> Result<R> {
        let mut guard = self.caches.solver.lock().unwrap();
        if guard.is_none() {
            *guard = Some(SatContext::new(&self.certain, self.atom_budget)?);
        }
        f(guard.as_mut().unwrap())
    }

    fn fact_norms(&self) -> &HashSet<Formula> {
        self.caches
            .fact_norms
            .get_or_init(|| self.certain.iter().map(|f| f.normalize()).collect())
    }

    fn certain_atoms(&self) -> &HashSet<Atom> {
        self.caches.atoms.get_or_init(|| {
            let mut out = Vec::new();
            for s in self.certain.iter() {
                s.atoms(&mut out);
            }
            out.into_iter().collect()
        })
    }

    /// `certain(E) ⊨ φ`, with syntactic fast paths for the common cases
    /// (φ is literally a certain sentence; φ is a literal over an atom the
    /// certain part never mentions).
    pub fn certain_entails(&self, phi: &Formula) -> Result<bool> {
        if self.fact_norms().contains(&phi.normalize()) {
            return Ok(true);
        }
        if let Some(atom) = as_literal(phi) {
            if !self.certain_atoms().contains(atom) {
                // the certain part is consistent and never constrains this
                // atom, so it cannot decide the literal
                return Ok(false);
            }
        }
        self.with_solver(|s| s.entails(phi))
    }

    /// Is `certain(E)` together with `extras` satisfiable?
    pub fn consistent_with(&self, extras: &[&Formula]) -> Result<bool> {
        self.with_solver(|s| s.satisfiable_with(extras))
    }

    /// `certain(E) ∪ assumptions ⊨ goal`.
    pub fn entails_with(&self, assumptions: &[&Formula], goal: &Formula) -> Result<bool> {
        self.with_solver(|s| s.entails_with(assumptions, goal))
    }

    /// Returns a new base containing the item; the original is unchanged.
    pub fn assert_evidence(&self, item: EvidenceItem) -> Result<EvidenceBase> {
        let mut next = self.clone();
        match item {
            EvidenceItem::Sentence(f) => {
                if !self.consistent_with(&[&f])? {
                    return Err(Error::InconsistentEvidence(format!(
                        "asserting `{}` contradicts the certain evidence",
                        f.display(&self.signature)
                    )));
                }
                next.certain.push(f.clone());
                next.facts.push(f);
            }
            EvidenceItem::Stat(s) => next.stats.push(s),
        }
        Ok(next)
    }

    /// Returns a new base without the item; errors if it is not present.
    pub fn retract_evidence(&self, item: &EvidenceItem) -> Result<EvidenceBase> {
        let mut next = self.clone();
        match item {
            EvidenceItem::Sentence(f) => {
                if !next.certain.remove(f) {
                    return Err(Error::ItemNotPresent(f.display(&self.signature)));
                }
                let n = f.normalize();
                next.facts.retain(|x| x.normalize() != n);
            }
            EvidenceItem::Stat(s) => {
                let Some(pos) = next.stats.iter().position(|x| x == s) else {
                    return Err(Error::ItemNotPresent(s.display(&self.signature)));
                };
                next.stats.remove(pos);
            }
        }
        Ok(next)
    }

    /// Does the subject provably belong to the reference class?
    pub fn class_applies(&self, reference: &OpenFormula, subject: ConstId) -> Result<bool> {
        self.certain_entails(&reference.instantiate(subject))
    }

    /// Extensional subsumption: for every declared constant c,
    /// `certain(E) ⊨ r1[c] → r2[c]`.
    pub fn class_subsumes(&self, r1: &OpenFormula, r2: &OpenFormula) -> Result<bool> {
        if r1 == r2 {
            return Ok(true);
        }
        for c in self.signature.constants() {
            let a = r1.instantiate(c);
            let nb = Formula::not(r2.instantiate(c));
            if self.consistent_with(&[&a, &nb])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Strict specificity: r1 subsumed into r2 but not conversely.
    pub fn strictly_more_specific(&self, r1: &OpenFormula, r2: &OpenFormula) -> Result<bool> {
        Ok(self.class_subsumes(r1, r2)? && !self.class_subsumes(r2, r1)?)
    }

    /// Exports the base in the knowledge-language text grammar.
    pub fn export(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let sig = &self.signature;
        if sig.num_constants() > 0 {
            let names: Vec<&str> = sig.constants().map(|c| sig.constant_name(c)).collect();
            let _ = writeln!(out, "const {}.", names.join(", "));
        }
        for (_, name, arity) in sig.predicates() {
            let _ = writeln!(out, "pred {name}/{arity}.");
        }
        for r in &self.rules {
            let _ = writeln!(
                out,
                "rule all {v}: {a} -> {c}.",
                v = r.variable,
                a = r.antecedent.display(sig, &r.variable),
                c = r.consequent.display(sig, &r.variable),
            );
        }
        for f in &self.facts {
            let _ = writeln!(out, "fact {}.", f.display(sig));
        }
        for s in &self.stats {
            let _ = writeln!(
                out,
                "stat {v}: {t} | {r} in [{l}, {u}].",
                v = s.variable,
                t = s.target.display(sig, &s.variable),
                r = s.reference.display(sig, &s.variable),
                l = s.interval.lower,
                u = s.interval.upper,
            );
        }
        out
    }
}

fn as_literal(f: &Formula) -> Option<&Atom> {
    match f {
        Formula::Atom(a) => Some(a),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => Some(a),
            _ => None,
        },
        _ => None,
    }
}
