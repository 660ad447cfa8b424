//! Minimal inconsistent subset extraction by deletion-based shrinking.

use super::solver::{consistent, SatContext};
use super::{Atom, Formula, Theory};
use crate::error::{Error, Result};

/// One persistent solver context answering "is this subset consistent?"
/// cheaply: sentence k enters as `φ_k ∨ ¬g_k` for a fresh selector atom
/// g_k, and a subset test just assumes the selectors of its members. The
/// deletion loop performs O(n) such tests per core, so rebuilding the
/// clause set each time would be quadratic in the theory size.
struct SubsetTester {
    ctx: SatContext,
    guards: Vec<Formula>,
}

impl SubsetTester {
    fn new(sentences: &[&Formula], budget: usize) -> Result<Self> {
        let mut next_pred = 0;
        let mut atoms = Vec::new();
        for s in sentences {
            s.atoms(&mut atoms);
        }
        for a in &atoms {
            next_pred = next_pred.max(a.pred + 1);
        }
        let guards: Vec<Formula> = (0..sentences.len())
            .map(|k| Formula::Atom(Atom::new(next_pred + k as u32, vec![])))
            .collect();
        let guarded: Theory = sentences
            .iter()
            .zip(&guards)
            .map(|(s, g)| Formula::or(vec![(*s).clone(), Formula::not(g.clone())]))
            .collect();
        // the selectors are an implementation detail, not scenario atoms
        let ctx = SatContext::new(&guarded, budget.saturating_add(sentences.len()))?;
        Ok(SubsetTester { ctx, guards })
    }

    fn consistent(&mut self, active: &[usize]) -> Result<bool> {
        let units: Vec<&Formula> = active.iter().map(|&k| &self.guards[k]).collect();
        self.ctx.satisfiable_with(&units)
    }
}

/// Extracts up to `limit` minimal inconsistent subsets of an inconsistent
/// theory. Deletion-based: shrink the whole set to one core, remove that
/// core from the pool, and repeat while the remainder is still
/// inconsistent. Output order follows input sentence order.
pub fn minimal_inconsistent_subsets(
    theory: &Theory,
    limit: usize,
    budget: usize,
) -> Result<Vec<Vec<Formula>>> {
    if consistent(theory, budget)? {
        return Err(Error::TheoryConsistent);
    }
    let sentences: Vec<&Formula> = theory.iter().collect();
    let mut tester = SubsetTester::new(&sentences, budget)?;
    let mut pool: Vec<usize> = (0..sentences.len()).collect();
    let mut cores = Vec::new();
    while cores.len() < limit {
        let core = shrink(&mut tester, &pool)?;
        pool.retain(|i| !core.contains(i));
        cores.push(core.iter().map(|&i| sentences[i].clone()).collect());
        if tester.consistent(&pool)? {
            break;
        }
    }
    Ok(cores)
}

fn shrink(tester: &mut SubsetTester, pool: &[usize]) -> Result<Vec<usize>> {
    // binary-search the shortest inconsistent prefix first: some core lies
    // entirely inside it, and the O(log n) tests often discard most of the
    // pool before the element-by-element deletion pass
    let mut lo = 1;
    let mut hi = pool.len();
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if tester.consistent(&pool[..mid])? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let mut kept: Vec<usize> = pool[..lo].to_vec();
    let mut i = 0;
    while i < kept.len() {
        let candidate: Vec<usize> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &k)| k)
            .collect();
        if !tester.consistent(&candidate)? {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(kept)
}
