//! The McCarthy–Hayes operator rule system: sentences wrapped with
//! Consistent / Normally / Probably, and the six addition rules.
//!
//! Rule 1 (add any consequence) is applied goal-directed only — free
//! forward closure is infinite. Rule 2's consistency check runs against
//! the plain-wrapped members of the current set. Rule 6 is an optional
//! toggle whose only job is to exhibit the contradiction.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::logic::solver::{consistent, entails};
use crate::logic::{Formula, Signature, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wrapper {
    Plain,
    Consistent,
    Normally,
    Probably,
}

impl std::fmt::Display for Wrapper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wrapper::Plain => write!(f, "plain"),
            Wrapper::Consistent => write!(f, "Consistent"),
            Wrapper::Normally => write!(f, "Normally"),
            Wrapper::Probably => write!(f, "Probably"),
        }
    }
}

/// A possibly operator-wrapped sentence; wrappers never nest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MhSentence {
    pub wrapper: Wrapper,
    pub body: Formula,
}

impl MhSentence {
    pub fn plain(body: Formula) -> Self {
        MhSentence { wrapper: Wrapper::Plain, body }
    }

    pub fn normally(body: Formula) -> Self {
        MhSentence { wrapper: Wrapper::Normally, body }
    }

    pub fn probably(body: Formula) -> Self {
        MhSentence { wrapper: Wrapper::Probably, body }
    }

    pub fn consistent(body: Formula) -> Self {
        MhSentence { wrapper: Wrapper::Consistent, body }
    }

    fn key(&self) -> (Wrapper, Formula) {
        (self.wrapper, self.body.normalize())
    }

    pub fn display(&self, sig: &Signature) -> String {
        match self.wrapper {
            Wrapper::Plain => self.body.display(sig),
            w => format!("{w}({})", self.body.display(sig)),
        }
    }
}

/// One derivation step: rule 0 marks a given member of σ0.
#[derive(Debug, Clone, PartialEq)]
pub struct MhStep {
    pub rule: u8,
    pub premises: Vec<usize>,
    pub sentence: MhSentence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivationTrace {
    pub steps: Vec<MhStep>,
    /// For each requested goal, the index of the step deriving it.
    pub goals: Vec<(MhSentence, Option<usize>)>,
    /// Set when the accumulated plain sentences became jointly inconsistent
    /// (only reachable with rule 6 enabled on an inconsistency-prone σ0).
    pub inconsistency_detected: bool,
    pub bound_exhausted: bool,
}

struct Engine<'a> {
    rules: &'a BTreeSet<u8>,
    steps: Vec<MhStep>,
    sigma0_len: usize,
    step_bound: usize,
    budget: usize,
    in_progress: Vec<(Wrapper, Formula)>,
    inconsistency: bool,
    bound_hit: bool,
}

impl<'a> Engine<'a> {
    fn plain_theory(&self) -> Theory {
        self.steps
            .iter()
            .filter(|s| s.sentence.wrapper == Wrapper::Plain)
            .map(|s| s.sentence.body.clone())
            .collect()
    }

    fn plain_indices(&self) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.sentence.wrapper == Wrapper::Plain)
            .map(|(i, _)| i)
            .collect()
    }

    fn find(&self, goal: &MhSentence) -> Option<usize> {
        let key = goal.key();
        self.steps.iter().position(|s| s.sentence.key() == key)
    }

    fn push(&mut self, rule: u8, premises: Vec<usize>, sentence: MhSentence) -> Result<Option<usize>> {
        if self.steps.len() - self.sigma0_len >= self.step_bound {
            self.bound_hit = true;
            return Ok(None);
        }
        let is_plain = sentence.wrapper == Wrapper::Plain;
        self.steps.push(MhStep { rule, premises, sentence });
        if is_plain && !consistent(&self.plain_theory(), self.budget)? {
            self.inconsistency = true;
        }
        Ok(Some(self.steps.len() - 1))
    }

    fn enabled(&self, rule: u8) -> bool {
        self.rules.contains(&rule)
    }

    fn derive(&mut self, goal: &MhSentence) -> Result<Option<usize>> {
        if let Some(i) = self.find(goal) {
            return Ok(Some(i));
        }
        let key = goal.key();
        if self.in_progress.contains(&key) {
            return Ok(None);
        }
        self.in_progress.push(key);
        let out = self.derive_inner(goal);
        self.in_progress.pop();
        out
    }

    fn derive_inner(&mut self, goal: &MhSentence) -> Result<Option<usize>> {
        match goal.wrapper {
            // Normally has no introduction rule; it only occurs in σ0.
            Wrapper::Normally => Ok(None),
            Wrapper::Consistent => {
                if !self.enabled(2) {
                    return Ok(None);
                }
                let mut theory = self.plain_theory();
                theory.push(goal.body.clone());
                if consistent(&theory, self.budget)? {
                    self.push(2, self.plain_indices(), goal.clone())
                } else {
                    Ok(None)
                }
            }
            Wrapper::Plain => {
                if self.enabled(1) {
                    let theory = self.plain_theory();
                    if entails(&theory, &goal.body, self.budget)? {
                        let premises = self.plain_indices();
                        return self.push(1, premises, goal.clone());
                    }
                }
                if self.enabled(6) {
                    if let Some(p) = self.derive(&MhSentence::probably(goal.body.clone()))? {
                        return self.push(6, vec![p], goal.clone());
                    }
                }
                Ok(None)
            }
            Wrapper::Probably => {
                // rule 4: from a plain occurrence of the body
                if self.enabled(4) {
                    if let Some(p) = self.derive(&MhSentence::plain(goal.body.clone()))? {
                        return self.push(4, vec![p], goal.clone());
                    }
                }
                // rule 3: Normally(body) + Consistent(body)
                if self.enabled(3) {
                    if let Some(n) = self.find(&MhSentence::normally(goal.body.clone())) {
                        if let Some(c) = self.derive(&MhSentence::consistent(goal.body.clone()))? {
                            return self.push(3, vec![n, c], goal.clone());
                        }
                    }
                }
                // rule 5: a possible deduction from Probably premises; the
                // candidate premise pool is the Normally bodies of σ0,
                // widened to include the plain σ0 bodies if needed
                if self.enabled(5) {
                    let normally_bodies: Vec<Formula> = self.steps[..self.sigma0_len]
                        .iter()
                        .filter(|s| s.sentence.wrapper == Wrapper::Normally)
                        .map(|s| s.sentence.body.clone())
                        .collect();
                    let plain_bodies: Vec<Formula> = self.steps[..self.sigma0_len]
                        .iter()
                        .filter(|s| s.sentence.wrapper == Wrapper::Plain)
                        .map(|s| s.sentence.body.clone())
                        .collect();
                    let mut widened = normally_bodies.clone();
                    widened.extend(plain_bodies);
                    for pool in [normally_bodies, widened] {
                        if pool.is_empty() {
                            continue;
                        }
                        let theory: Theory = pool.iter().cloned().collect();
                        if !entails(&theory, &goal.body, self.budget)? {
                            continue;
                        }
                        let mut premise_steps = Vec::new();
                        let mut ok = true;
                        for b in &pool {
                            match self.derive(&MhSentence::probably(b.clone()))? {
                                Some(i) => premise_steps.push(i),
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if ok {
                            return self.push(5, premise_steps, goal.clone());
                        }
                    }
                }
                Ok(None)
            }
        }
    }
}

/// Goal-directed derivation in the rule system. σ0 members become "given"
/// steps (rule id 0); each reachable goal is derived within the step
/// bound and recorded in the returned trace.
pub fn mh_derive(
    sigma0: &[MhSentence],
    rules_enabled: &BTreeSet<u8>,
    goals: &[MhSentence],
    step_bound: usize,
    budget: usize,
) -> Result<DerivationTrace> {
    let steps: Vec<MhStep> = sigma0
        .iter()
        .map(|s| MhStep {
            rule: 0,
            premises: vec![],
            sentence: s.clone(),
        })
        .collect();
    let mut engine = Engine {
        rules: rules_enabled,
        sigma0_len: steps.len(),
        steps,
        step_bound,
        budget,
        in_progress: Vec::new(),
        inconsistency: false,
        bound_hit: false,
    };
    let mut goal_results = Vec::new();
    for g in goals {
        let r = engine.derive(g)?;
        goal_results.push((g.clone(), r));
    }
    Ok(DerivationTrace {
        steps: engine.steps,
        goals: goal_results,
        inconsistency_detected: engine.inconsistency,
        bound_exhausted: engine.bound_hit,
    })
}

/// Re-checks every step of a trace against the given σ0 and rule set.
/// Returns true iff each step's rule precondition is verifiable from the
/// prior steps alone.
pub fn replay_trace(
    trace: &DerivationTrace,
    sigma0: &[MhSentence],
    rules_enabled: &BTreeSet<u8>,
    budget: usize,
) -> Result<bool> {
    for (i, step) in trace.steps.iter().enumerate() {
        if step.premises.iter().any(|&p| p >= i) {
            return Ok(false);
        }
        let prior_plain: Theory = trace.steps[..i]
            .iter()
            .filter(|s| s.sentence.wrapper == Wrapper::Plain)
            .map(|s| s.sentence.body.clone())
            .collect();
        let ok = match step.rule {
            0 => sigma0.iter().any(|s| s.key() == step.sentence.key()),
            1 => {
                let premise_theory: Theory = step
                    .premises
                    .iter()
                    .filter(|&&p| trace.steps[p].sentence.wrapper == Wrapper::Plain)
                    .map(|&p| trace.steps[p].sentence.body.clone())
                    .collect();
                rules_enabled.contains(&1)
                    && step.sentence.wrapper == Wrapper::Plain
                    && entails(&premise_theory, &step.sentence.body, budget)?
            }
            2 => {
                let mut t = prior_plain.clone();
                t.push(step.sentence.body.clone());
                rules_enabled.contains(&2)
                    && step.sentence.wrapper == Wrapper::Consistent
                    && consistent(&t, budget)?
            }
            3 => {
                rules_enabled.contains(&3)
                    && step.sentence.wrapper == Wrapper::Probably
                    && step.premises.len() == 2
                    && {
                        let n = &trace.steps[step.premises[0]].sentence;
                        let c = &trace.steps[step.premises[1]].sentence;
                        n.wrapper == Wrapper::Normally
                            && c.wrapper == Wrapper::Consistent
                            && n.body.normalize() == step.sentence.body.normalize()
                            && c.body.normalize() == step.sentence.body.normalize()
                    }
            }
            4 => {
                rules_enabled.contains(&4)
                    && step.sentence.wrapper == Wrapper::Probably
                    && step.premises.len() == 1
                    && {
                        let p = &trace.steps[step.premises[0]].sentence;
                        p.wrapper == Wrapper::Plain
                            && p.body.normalize() == step.sentence.body.normalize()
                    }
            }
            5 => {
                let premise_bodies: Theory = step
                    .premises
                    .iter()
                    .map(|&p| trace.steps[p].sentence.body.clone())
                    .collect();
                rules_enabled.contains(&5)
                    && step.sentence.wrapper == Wrapper::Probably
                    && step
                        .premises
                        .iter()
                        .all(|&p| trace.steps[p].sentence.wrapper == Wrapper::Probably)
                    && entails(&premise_bodies, &step.sentence.body, budget)?
            }
            6 => {
                rules_enabled.contains(&6)
                    && step.sentence.wrapper == Wrapper::Plain
                    && step.premises.len() == 1
                    && {
                        let p = &trace.steps[step.premises[0]].sentence;
                        p.wrapper == Wrapper::Probably
                            && p.body.normalize() == step.sentence.body.normalize()
                    }
            }
            _ => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
