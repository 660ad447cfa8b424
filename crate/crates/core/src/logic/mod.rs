//! Ground, function-free first-order substrate over a finite constant
//! domain: signatures, ground formulas, theories, entailment and
//! consistency via a propositional solver, and minimal-inconsistent-subset
//! extraction.

pub mod mus;
pub mod parser;
pub mod solver;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a declared constant, in declaration order.
pub type ConstId = u32;
/// Index of a declared predicate, in declaration order.
pub type PredId = u32;

/// Declared constants and predicates of a knowledge base.
///
/// Iteration order is declaration order everywhere; this is what makes
/// traces and subset extraction reproducible.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Signature {
    constants: Vec<String>,
    const_idx: HashMap<String, ConstId>,
    preds: Vec<(String, usize)>,
    pred_idx: HashMap<String, PredId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_constant(&mut self, name: &str) -> ConstId {
        if let Some(&id) = self.const_idx.get(name) {
            return id;
        }
        let id = self.constants.len() as ConstId;
        self.constants.push(name.to_string());
        self.const_idx.insert(name.to_string(), id);
        id
    }

    /// Declares a predicate, or checks arity agreement if already known.
    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<PredId> {
        if let Some(&id) = self.pred_idx.get(name) {
            let declared = self.preds[id as usize].1;
            if declared != arity {
                return Err(Error::ArityMismatch {
                    name: name.to_string(),
                    declared,
                    used: arity,
                });
            }
            return Ok(id);
        }
        let id = self.preds.len() as PredId;
        self.preds.push((name.to_string(), arity));
        self.pred_idx.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn constant(&self, name: &str) -> Option<ConstId> {
        self.const_idx.get(name).copied()
    }

    pub fn predicate(&self, name: &str) -> Option<PredId> {
        self.pred_idx.get(name).copied()
    }

    pub fn constant_name(&self, id: ConstId) -> &str {
        &self.constants[id as usize]
    }

    pub fn predicate_name(&self, id: PredId) -> &str {
        &self.preds[id as usize].0
    }

    pub fn predicate_arity(&self, id: PredId) -> usize {
        self.preds[id as usize].1
    }

    pub fn constants(&self) -> impl Iterator<Item = ConstId> + '_ {
        (0..self.constants.len() as ConstId).into_iter()
    }

    pub fn num_constants(&self) -> usize {
        self.constants.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.preds.len()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (PredId, &str, usize)> + '_ {
        self.preds
            .iter()
            .enumerate()
            .map(|(i, (n, a))| (i as PredId, n.as_str(), *a))
    }
}

/// A ground atom: predicate applied to declared constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

impl Atom {
    pub fn new(pred: PredId, args: Vec<ConstId>) -> Self {
        Atom { pred, args }
    }

    pub fn display(&self, sig: &Signature) -> String {
        let mut s = sig.predicate_name(self.pred).to_string();
        if !self.args.is_empty() {
            s.push('(');
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(sig.constant_name(*a));
            }
            s.push(')');
        }
        s
    }
}

/// A ground formula. `Implies` appears only from grounded universal rules;
/// the surface formula grammar has no implication.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        debug_assert!(!fs.is_empty());
        if fs.len() == 1 {
            fs.into_iter().next().unwrap()
        } else {
            Formula::And(fs)
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        debug_assert!(!fs.is_empty());
        if fs.len() == 1 {
            fs.into_iter().next().unwrap()
        } else {
            Formula::Or(fs)
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Canonical form used for sentence identity: implication rewritten as
    /// material disjunction, double negations eliminated, conjuncts and
    /// disjuncts flattened, sorted and deduplicated. Deliberately nothing
    /// stronger (no De Morgan, no semantic simplification).
    pub fn normalize(&self) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Not(inner) => {
                let n = inner.normalize();
                match n {
                    Formula::Not(x) => *x,
                    other => Formula::Not(Box::new(other)),
                }
            }
            Formula::And(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match f.normalize() {
                        Formula::And(sub) => parts.extend(sub),
                        other => parts.push(other),
                    }
                }
                parts.sort();
                parts.dedup();
                Formula::and(parts)
            }
            Formula::Or(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match f.normalize() {
                        Formula::Or(sub) => parts.extend(sub),
                        other => parts.push(other),
                    }
                }
                parts.sort();
                parts.dedup();
                Formula::or(parts)
            }
            Formula::Implies(a, b) => {
                Formula::or(vec![Formula::not(a.normalize()), b.normalize()]).normalize()
            }
        }
    }

    pub fn atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            Formula::Not(f) => f.atoms(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.atoms(out);
                }
            }
            Formula::Implies(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    /// Constants mentioned, in first-mention order.
    pub fn constants(&self) -> Vec<ConstId> {
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        let mut out = Vec::new();
        for a in atoms {
            for &c in &a.args {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn eval(&self, assignment: &dyn Fn(&Atom) -> bool) -> bool {
        match self {
            Formula::Atom(a) => assignment(a),
            Formula::Not(f) => !f.eval(assignment),
            Formula::And(fs) => fs.iter().all(|f| f.eval(assignment)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(assignment)),
            Formula::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
        }
    }

    pub fn display(&self, sig: &Signature) -> String {
        fn go(f: &Formula, sig: &Signature, parent: u8, out: &mut String) {
            // parent precedence: 0 none, 1 or, 2 and, 3 unary
            let (prec, sep, parts): (u8, &str, Option<&Vec<Formula>>) = match f {
                Formula::Or(fs) => (1, " v ", Some(fs)),
                Formula::And(fs) => (2, " & ", Some(fs)),
                _ => (4, "", None),
            };
            match f {
                Formula::Atom(a) => out.push_str(&a.display(sig)),
                Formula::Not(inner) => {
                    out.push('~');
                    go(inner, sig, 3, out);
                }
                Formula::Implies(a, b) => {
                    out.push('(');
                    go(a, sig, 0, out);
                    out.push_str(" -> ");
                    go(b, sig, 0, out);
                    out.push(')');
                }
                Formula::And(_) | Formula::Or(_) => {
                    let need_parens = prec < parent || parent == 3;
                    if need_parens {
                        out.push('(');
                    }
                    for (i, p) in parts.unwrap().iter().enumerate() {
                        if i > 0 {
                            out.push_str(sep);
                        }
                        go(p, sig, prec, out);
                    }
                    if need_parens {
                        out.push(')');
                    }
                }
            }
        }
        let mut s = String::new();
        go(self, sig, 0, &mut s);
        s
    }
}

/// Argument position in a one-variable open formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var,
    Const(ConstId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpenAtom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

/// A formula over exactly one free variable (reference classes, stat
/// targets, universal-rule sides).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpenFormula {
    Atom(OpenAtom),
    Not(Box<OpenFormula>),
    And(Vec<OpenFormula>),
    Or(Vec<OpenFormula>),
}

impl OpenFormula {
    pub fn instantiate(&self, c: ConstId) -> Formula {
        match self {
            OpenFormula::Atom(a) => Formula::Atom(Atom::new(
                a.pred,
                a.args
                    .iter()
                    .map(|t| match t {
                        Term::Var => c,
                        Term::Const(k) => *k,
                    })
                    .collect(),
            )),
            OpenFormula::Not(f) => Formula::not(f.instantiate(c)),
            OpenFormula::And(fs) => Formula::and(fs.iter().map(|f| f.instantiate(c)).collect()),
            OpenFormula::Or(fs) => Formula::or(fs.iter().map(|f| f.instantiate(c)).collect()),
        }
    }

    pub fn mentions_var(&self) -> bool {
        match self {
            OpenFormula::Atom(a) => a.args.iter().any(|t| *t == Term::Var),
            OpenFormula::Not(f) => f.mentions_var(),
            OpenFormula::And(fs) | OpenFormula::Or(fs) => fs.iter().any(|f| f.mentions_var()),
        }
    }

    pub fn display(&self, sig: &Signature, var: &str) -> String {
        match self {
            OpenFormula::Atom(a) => {
                let mut s = sig.predicate_name(a.pred).to_string();
                if !a.args.is_empty() {
                    s.push('(');
                    for (i, t) in a.args.iter().enumerate() {
                        if i > 0 {
                            s.push_str(", ");
                        }
                        match t {
                            Term::Var => s.push_str(var),
                            Term::Const(c) => s.push_str(sig.constant_name(*c)),
                        }
                    }
                    s.push(')');
                }
                s
            }
            OpenFormula::Not(f) => format!("~{}", f.display(sig, var)),
            OpenFormula::And(fs) => fs
                .iter()
                .map(|f| f.display(sig, var))
                .collect::<Vec<_>>()
                .join(" & "),
            OpenFormula::Or(fs) => format!(
                "({})",
                fs.iter()
                    .map(|f| f.display(sig, var))
                    .collect::<Vec<_>>()
                    .join(" v ")
            ),
        }
    }
}

/// A universal rule `all x: antecedent(x) -> consequent(x)`, stored
/// unexpanded; grounding happens eagerly over the declared constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalRule {
    pub variable: String,
    pub antecedent: OpenFormula,
    pub consequent: OpenFormula,
}

impl UniversalRule {
    /// One ground implication per declared constant.
    pub fn ground(&self, sig: &Signature) -> Vec<Formula> {
        sig.constants()
            .map(|c| Formula::implies(self.antecedent.instantiate(c), self.consequent.instantiate(c)))
            .collect()
    }
}

/// A finite set of ground sentences, deduplicated by canonical form,
/// insertion order preserved. Equality is set equality of canonical
/// forms; iteration order does not matter for identity.
#[derive(Debug, Clone, Default, Eq)]
pub struct Theory {
    sentences: Vec<Formula>,
    normals: Vec<Formula>,
    index: HashSet<Formula>,
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        if self.normals.len() != other.normals.len() {
            return false;
        }
        let mut a = self.normals.clone();
        let mut b = other.normals.clone();
        a.sort();
        b.sort();
        a == b
    }
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sentences(sentences: impl IntoIterator<Item = Formula>) -> Self {
        let mut t = Theory::new();
        for s in sentences {
            t.push(s);
        }
        t
    }

    /// Adds a sentence unless an equivalent (canonical-form) one is present.
    pub fn push(&mut self, f: Formula) -> bool {
        let n = f.normalize();
        if !self.index.insert(n.clone()) {
            return false;
        }
        self.sentences.push(f);
        self.normals.push(n);
        true
    }

    pub fn remove(&mut self, f: &Formula) -> bool {
        let n = f.normalize();
        if let Some(pos) = self.normals.iter().position(|x| *x == n) {
            self.sentences.remove(pos);
            self.normals.remove(pos);
            self.index.remove(&n);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains(&f.normalize())
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

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.sentences.iter()
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for s in &self.sentences {
            s.atoms(&mut out);
        }
        out
    }

    pub fn display(&self, sig: &Signature) -> String {
        let mut s = String::new();
        for f in &self.sentences {
            let _ = writeln!(s, "{}", f.display(sig));
        }
        s
    }
}

impl FromIterator<Formula> for Theory {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        Theory::from_sentences(iter)
    }
}

/// Shared signature handle; knowledge bases, corpora and scenarios all
/// point at the same declaration table.
pub type SigRef = Arc<Signature>;

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        let mut s = Signature::new();
        s.add_constant("a");
        s.add_constant("b");
        s.add_predicate("p", 1).unwrap();
        s.add_predicate("q", 1).unwrap();
        s
    }

    fn p(s: &Signature, c: &str) -> Formula {
        Formula::Atom(Atom::new(
            s.predicate("p").unwrap(),
            vec![s.constant(c).unwrap()],
        ))
    }

    fn q(s: &Signature, c: &str) -> Formula {
        Formula::Atom(Atom::new(
            s.predicate("q").unwrap(),
            vec![s.constant(c).unwrap()],
        ))
    }

    #[test]
    fn double_negation_eliminated() {
        let s = sig();
        let f = Formula::not(Formula::not(p(&s, "a")));
        assert_eq!(f.normalize(), p(&s, "a"));
    }

    #[test]
    fn commutative_set_equality() {
        let s = sig();
        let f1 = Formula::and(vec![p(&s, "a"), q(&s, "b")]);
        let f2 = Formula::and(vec![q(&s, "b"), p(&s, "a"), p(&s, "a")]);
        assert_eq!(f1.normalize(), f2.normalize());
    }

    #[test]
    fn implication_is_material() {
        let s = sig();
        let f = Formula::implies(p(&s, "a"), q(&s, "a"));
        let g = Formula::or(vec![Formula::not(p(&s, "a")), q(&s, "a")]);
        assert_eq!(f.normalize(), g.normalize());
    }

    #[test]
    fn no_de_morgan_in_normal_form() {
        let s = sig();
        let f = Formula::not(Formula::and(vec![p(&s, "a"), q(&s, "a")]));
        let g = Formula::or(vec![Formula::not(p(&s, "a")), Formula::not(q(&s, "a"))]);
        assert_ne!(f.normalize(), g.normalize());
    }

    #[test]
    fn theory_dedups_by_canonical_form() {
        let s = sig();
        let mut t = Theory::new();
        assert!(t.push(Formula::and(vec![p(&s, "a"), q(&s, "a")])));
        assert!(!t.push(Formula::and(vec![q(&s, "a"), p(&s, "a")])));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn rule_grounding_yields_one_sentence_per_constant() {
        let s = sig();
        let rule = UniversalRule {
            variable: "x".into(),
            antecedent: OpenFormula::Atom(OpenAtom {
                pred: s.predicate("p").unwrap(),
                args: vec![Term::Var],
            }),
            consequent: OpenFormula::Atom(OpenAtom {
                pred: s.predicate("q").unwrap(),
                args: vec![Term::Var],
            }),
        };
        assert_eq!(rule.ground(&s).len(), s.num_constants());
    }
}
