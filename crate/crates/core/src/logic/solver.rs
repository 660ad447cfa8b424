//! Propositional entailment and consistency over ground theories.
//!
//! Two engines, kept deliberately separate:
//! - [`SatContext`], a backtracking solver with two-watched-literal unit
//!   propagation. The base theory's clauses and watch lists persist across
//!   queries, so per-query work is proportional to the query, not the base.
//! - [`oracle`], full truth-table enumeration, capped at 20 atoms. Test
//!   code cross-checks the solver against it; nothing in the production
//!   path calls it.

use std::collections::HashMap;

use super::{Atom, Formula, Theory};
use crate::error::{Error, Result};

/// Default cap on distinct ground atoms per solving context.
pub const DEFAULT_ATOM_BUDGET: usize = 4096;

/// 1-based signed literal: var v is `v+1` positive, `-(v+1)` negative.
type Lit = i32;

fn lit_var(l: Lit) -> usize {
    (l.unsigned_abs() - 1) as usize
}

fn lit_index(l: Lit) -> usize {
    2 * lit_var(l) + usize::from(l < 0)
}

/// Negation-normal-form scratch tree used during clausification.
enum Nnf {
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

/// Persistent solving context for one base theory.
pub struct SatContext {
    atoms: Vec<Atom>,
    map: HashMap<Atom, usize>,
    base_atoms: usize,
    budget: usize,
    clauses: Vec<Vec<Lit>>,
    base_clauses: usize,
    base_units: Vec<Lit>,
    base_empty: bool,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    trail: Vec<Lit>,
}

impl SatContext {
    pub fn new(theory: &Theory, budget: usize) -> Result<Self> {
        let mut ctx = SatContext {
            atoms: Vec::new(),
            map: HashMap::new(),
            base_atoms: 0,
            budget,
            clauses: Vec::new(),
            base_clauses: 0,
            base_units: Vec::new(),
            base_empty: false,
            watches: Vec::new(),
            assign: Vec::new(),
            trail: Vec::new(),
        };
        let mut units = Vec::new();
        let mut empty = false;
        for sentence in theory.iter() {
            ctx.intern_formula(sentence)?;
            for clause in ctx.clausify(sentence) {
                match clause.len() {
                    0 => empty = true,
                    1 => units.push(clause[0]),
                    _ => ctx.add_watched(clause),
                }
            }
        }
        ctx.base_units = units;
        ctx.base_empty = empty;
        ctx.base_atoms = ctx.atoms.len();
        ctx.base_clauses = ctx.clauses.len();
        ctx.assign.resize(ctx.atoms.len(), 0);
        ctx.watches.resize(2 * ctx.atoms.len(), Vec::new());
        Ok(ctx)
    }

    pub fn num_atoms(&self) -> usize {
        self.base_atoms
    }

    fn intern_atom(&mut self, a: &Atom) -> Result<usize> {
        if let Some(&v) = self.map.get(a) {
            return Ok(v);
        }
        if self.atoms.len() >= self.budget {
            return Err(Error::AtomBudgetExceeded {
                atoms: self.atoms.len() + 1,
                budget: self.budget,
            });
        }
        let v = self.atoms.len();
        self.atoms.push(a.clone());
        self.map.insert(a.clone(), v);
        Ok(v)
    }

    fn intern_formula(&mut self, f: &Formula) -> Result<()> {
        let mut atoms = Vec::new();
        f.atoms(&mut atoms);
        for a in &atoms {
            self.intern_atom(a)?;
        }
        Ok(())
    }

    fn nnf(&self, f: &Formula, positive: bool) -> Nnf {
        match (f, positive) {
            (Formula::Atom(a), pos) => {
                let v = self.map[a] as i32 + 1;
                Nnf::Lit(if pos { v } else { -v })
            }
            (Formula::Not(g), pos) => self.nnf(g, !pos),
            (Formula::And(fs), true) | (Formula::Or(fs), false) => {
                Nnf::And(fs.iter().map(|g| self.nnf(g, positive)).collect())
            }
            (Formula::Or(fs), true) | (Formula::And(fs), false) => {
                Nnf::Or(fs.iter().map(|g| self.nnf(g, positive)).collect())
            }
            (Formula::Implies(a, b), true) => {
                Nnf::Or(vec![self.nnf(a, false), self.nnf(b, true)])
            }
            (Formula::Implies(a, b), false) => {
                Nnf::And(vec![self.nnf(a, true), self.nnf(b, false)])
            }
        }
    }

    /// CNF by distribution. Fine for the shallow formulas this engine sees;
    /// clauses that are tautologous are dropped, duplicate literals merged.
    fn clausify(&self, f: &Formula) -> Vec<Vec<Lit>> {
        fn go(n: &Nnf) -> Vec<Vec<Lit>> {
            match n {
                Nnf::Lit(l) => vec![vec![*l]],
                Nnf::And(parts) => parts.iter().flat_map(go).collect(),
                Nnf::Or(parts) => {
                    let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
                    for p in parts {
                        let sub = go(p);
                        if sub.len() == 1 {
                            // common flat-disjunction case: extend in place
                            // so a k-literal clause costs O(k), not O(k²)
                            for a in &mut acc {
                                a.extend_from_slice(&sub[0]);
                            }
                        } else {
                            let mut next = Vec::with_capacity(acc.len() * sub.len());
                            for a in &acc {
                                for s in &sub {
                                    let mut c = a.clone();
                                    c.extend_from_slice(s);
                                    next.push(c);
                                }
                            }
                            acc = next;
                        }
                    }
                    acc
                }
            }
        }
        go(&self.nnf(f, true))
            .into_iter()
            .filter_map(|mut c| {
                c.sort_unstable_by_key(|l| (l.abs(), *l));
                c.dedup();
                // after dedup, equal magnitudes must be opposite signs
                if c.windows(2).any(|w| w[0].abs() == w[1].abs()) {
                    None
                } else {
                    Some(c)
                }
            })
            .collect()
    }

    fn add_watched(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.len() >= 2);
        let ci = self.clauses.len();
        let need = 2 * self.atoms.len();
        if self.watches.len() < need {
            self.watches.resize(need, Vec::new());
        }
        self.watches[lit_index(clause[0])].push(ci);
        self.watches[lit_index(clause[1])].push(ci);
        self.clauses.push(clause);
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[lit_var(l)];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn assign_lit(&mut self, l: Lit) {
        self.assign[lit_var(l)] = if l > 0 { 1 } else { -1 };
        self.trail.push(l);
    }

    /// Propagates from `qhead`; returns false on conflict.
    fn propagate(&mut self, mut qhead: usize) -> (bool, usize) {
        while qhead < self.trail.len() {
            let lit = self.trail[qhead];
            qhead += 1;
            let false_lit = -lit;
            let widx = lit_index(false_lit);
            let mut list = std::mem::take(&mut self.watches[widx]);
            let mut i = 0;
            let mut conflict = false;
            while i < list.len() {
                let ci = list[i];
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                if self.value(self.clauses[ci][0]) == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for j in 2..self.clauses[ci].len() {
                    if self.value(self.clauses[ci][j]) != -1 {
                        self.clauses[ci].swap(1, j);
                        let new_watch = self.clauses[ci][1];
                        self.watches[lit_index(new_watch)].push(ci);
                        list.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                let first = self.clauses[ci][0];
                match self.value(first) {
                    -1 => {
                        conflict = true;
                        break;
                    }
                    0 => self.assign_lit(first),
                    _ => {}
                }
                i += 1;
            }
            self.watches[widx] = list;
            if conflict {
                return (false, qhead);
            }
        }
        (true, qhead)
    }

    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            1 => true,
            -1 => false,
            _ => {
                self.assign_lit(l);
                true
            }
        }
    }

    fn search(&mut self, init_units: &[Lit]) -> bool {
        for &u in init_units {
            if !self.enqueue(u) {
                return false;
            }
        }
        let (ok, mut qhead) = self.propagate(0);
        if !ok {
            return false;
        }
        // decision stack: (trail length before decision, decided lit, flipped, search position)
        let mut decisions: Vec<(usize, Lit, bool, usize)> = Vec::new();
        let mut search_pos = 0usize;
        loop {
            let mut var = None;
            let mut pos = search_pos;
            while pos < self.assign.len() {
                if self.assign[pos] == 0 {
                    var = Some(pos);
                    break;
                }
                pos += 1;
            }
            let Some(v) = var else {
                return true;
            };
            search_pos = pos;
            let lit = v as i32 + 1;
            decisions.push((self.trail.len(), lit, false, search_pos));
            self.assign_lit(lit);
            loop {
                let (ok, q) = self.propagate(qhead);
                qhead = q;
                if ok {
                    break;
                }
                // backtrack
                loop {
                    match decisions.pop() {
                        None => return false,
                        Some((level, dlit, flipped, spos)) => {
                            while self.trail.len() > level {
                                let l = self.trail.pop().unwrap();
                                self.assign[lit_var(l)] = 0;
                            }
                            qhead = level;
                            search_pos = spos;
                            if !flipped {
                                decisions.push((level, -dlit, true, spos));
                                self.assign_lit(-dlit);
                                break;
                            }
                        }
                    }
                }
            }
        }
    }

    fn cleanup(&mut self, extra_atom_start: usize) {
        while let Some(l) = self.trail.pop() {
            self.assign[lit_var(l)] = 0;
        }
        while self.clauses.len() > self.base_clauses {
            let ci = self.clauses.len() - 1;
            let clause = self.clauses.pop().unwrap();
            for &w in &clause[..2] {
                let list = &mut self.watches[lit_index(w)];
                if let Some(p) = list.iter().position(|&x| x == ci) {
                    list.swap_remove(p);
                }
            }
        }
        while self.atoms.len() > extra_atom_start {
            let a = self.atoms.pop().unwrap();
            self.map.remove(&a);
        }
        self.assign.truncate(self.base_atoms);
        self.assign.resize(self.base_atoms, 0);
        self.watches.truncate(2 * self.base_atoms);
        self.watches.resize(2 * self.base_atoms, Vec::new());
    }

    /// Is the base theory together with `extras` satisfiable?
    pub fn satisfiable_with(&mut self, extras: &[&Formula]) -> Result<bool> {
        let atom_mark = self.atoms.len();
        debug_assert_eq!(atom_mark, self.base_atoms);
        let mut extra_units = Vec::new();
        let mut empty = self.base_empty;
        for f in extras {
            if let Err(e) = self.intern_formula(f) {
                self.cleanup(self.base_atoms);
                return Err(e);
            }
        }
        self.assign.resize(self.atoms.len(), 0);
        self.watches.resize(2 * self.atoms.len(), Vec::new());
        for f in extras {
            for clause in self.clausify(f) {
                match clause.len() {
                    0 => empty = true,
                    1 => extra_units.push(clause[0]),
                    _ => self.add_watched(clause),
                }
            }
        }
        let result = if empty {
            false
        } else {
            let mut units = self.base_units.clone();
            units.extend(extra_units);
            self.search(&units)
        };
        self.cleanup(self.base_atoms);
        Ok(result)
    }

    pub fn satisfiable(&mut self) -> Result<bool> {
        self.satisfiable_with(&[])
    }

    /// Does the base theory, together with `assumptions`, entail `goal`?
    pub fn entails_with(&mut self, assumptions: &[&Formula], goal: &Formula) -> Result<bool> {
        let negated = Formula::not(goal.clone());
        let mut extras: Vec<&Formula> = assumptions.to_vec();
        extras.push(&negated);
        Ok(!self.satisfiable_with(&extras)?)
    }

    pub fn entails(&mut self, goal: &Formula) -> Result<bool> {
        self.entails_with(&[], goal)
    }
}

/// One-shot entailment check: `theory ⊨ goal`.
pub fn entails(theory: &Theory, goal: &Formula, budget: usize) -> Result<bool> {
    SatContext::new(theory, budget)?.entails(goal)
}

/// One-shot satisfiability check.
pub fn consistent(theory: &Theory, budget: usize) -> Result<bool> {
    SatContext::new(theory, budget)?.satisfiable()
}

/// Truth-table enumeration engine, for cross-checking the solver.
pub mod oracle {
    use super::*;

    const LIMIT: usize = 20;

    fn collect_atoms(theory: &Theory, extra: Option<&Formula>) -> Result<Vec<Atom>> {
        let mut atoms = theory.atoms();
        if let Some(f) = extra {
            f.atoms(&mut atoms);
        }
        if atoms.len() > LIMIT {
            return Err(Error::OracleLimit(atoms.len()));
        }
        Ok(atoms)
    }

    fn for_some_model(theory: &Theory, atoms: &[Atom], pred: impl Fn(&dyn Fn(&Atom) -> bool) -> bool) -> bool {
        let index: HashMap<&Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        for mask in 0u64..(1u64 << atoms.len()) {
            let assignment = |a: &Atom| -> bool { mask >> index[a] & 1 == 1 };
            if theory.iter().all(|s| s.eval(&assignment)) && pred(&assignment) {
                return true;
            }
        }
        false
    }

    pub fn consistent(theory: &Theory) -> Result<bool> {
        let atoms = collect_atoms(theory, None)?;
        Ok(for_some_model(theory, &atoms, |_| true))
    }

    pub fn entails(theory: &Theory, goal: &Formula) -> Result<bool> {
        let atoms = collect_atoms(theory, Some(goal))?;
        Ok(!for_some_model(theory, &atoms, |m| !goal.eval(m)))
    }
}
