//! Reiter default theories and exhaustive extension computation.

use crate::error::{Error, Result};
use crate::logic::solver::SatContext;
use crate::logic::{Formula, Signature, Theory};

/// `A : M B_1, …, M B_n / C` — all parts ground.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultRule {
    pub prerequisite: Option<Formula>,
    pub justifications: Vec<Formula>,
    pub consequent: Formula,
}

impl DefaultRule {
    pub fn display(&self, sig: &Signature) -> String {
        let pre = self
            .prerequisite
            .as_ref()
            .map(|f| f.display(sig))
            .unwrap_or_default();
        let justs = self
            .justifications
            .iter()
            .map(|f| format!("M {}", f.display(sig)))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{pre} : {justs} / {}", self.consequent.display(sig))
    }
}

/// Exhaustive enumeration bound on the number of defaults.
pub const MAX_DEFAULTS: usize = 20;

/// A default theory (W, D).
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultTheory {
    pub background: Theory,
    pub defaults: Vec<DefaultRule>,
}

/// An extension, represented by its finite generator set: the extension
/// itself is the deductive closure of `background ∪ consequents`, and
/// membership queries go through entailment instead of materializing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    /// Indices into the theory's default list.
    pub generating_defaults: Vec<usize>,
    /// Consequents of the generating defaults, deduplicated.
    pub consequents: Vec<Formula>,
}

/// Checks the fixed-point conditions for a candidate generator set `s`
/// (given as ground sentences; matching is by canonical form):
/// with Ext = W ∪ s, Ext must be consistent, and for every default,
/// applicability against Ext must coincide with membership of its
/// consequent in s. When W itself is inconsistent, the single anomalous
/// extension is generated by every consequent.
pub fn is_extension(theory: &DefaultTheory, s: &[Formula], budget: usize) -> Result<bool> {
    let s_norm: Vec<Formula> = s.iter().map(|f| f.normalize()).collect();
    let all_consequents: Vec<Formula> = theory
        .defaults
        .iter()
        .map(|d| d.consequent.normalize())
        .collect();

    let mut w_ctx = SatContext::new(&theory.background, budget)?;
    if !w_ctx.satisfiable()? {
        return Ok(all_consequents.iter().all(|c| s_norm.contains(c))
            && s_norm.iter().all(|c| all_consequents.contains(c)));
    }

    let mut ext = theory.background.clone();
    for f in s {
        ext.push(f.clone());
    }
    let mut ctx = SatContext::new(&ext, budget)?;
    if !ctx.satisfiable()? {
        return Ok(false);
    }
    for d in &theory.defaults {
        let prereq_holds = match &d.prerequisite {
            None => true,
            Some(p) => ctx.entails(p)?,
        };
        let mut applicable = prereq_holds;
        if applicable {
            for j in &d.justifications {
                if !ctx.satisfiable_with(&[j])? {
                    applicable = false;
                    break;
                }
            }
        }
        let member = s_norm.contains(&d.consequent.normalize());
        if applicable != member {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All extensions, by exhaustive guess-and-verify over subsets of the
/// default set. Deterministic: subsets are visited in increasing bitmask
/// order and results deduplicated by consequent set.
pub fn compute_extensions(theory: &DefaultTheory, budget: usize) -> Result<Vec<Extension>> {
    let n = theory.defaults.len();
    if n > MAX_DEFAULTS {
        return Err(Error::DefaultBound(n));
    }
    let mut found: Vec<Extension> = Vec::new();
    let mut seen: Vec<Vec<Formula>> = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let generating: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mut consequents: Vec<Formula> = Vec::new();
        for &i in &generating {
            let c = theory.defaults[i].consequent.clone();
            if !consequents.iter().any(|x| x.normalize() == c.normalize()) {
                consequents.push(c);
            }
        }
        let mut key: Vec<Formula> = consequents.iter().map(|f| f.normalize()).collect();
        key.sort();
        if seen.contains(&key) {
            continue;
        }
        if is_extension(theory, &consequents, budget)? {
            seen.push(key);
            found.push(Extension {
                generating_defaults: generating,
                consequents,
            });
        }
    }
    Ok(found)
}
