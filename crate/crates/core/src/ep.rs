//! Evidential probability: map a ground query to an interval using
//! reference-class candidates, a weakening rule, specificity pruning, and
//! an interval hull.

use crate::error::{Error, Result};
use crate::evidence::{EvidenceBase, ProbabilityInterval};
use crate::logic::{ConstId, Formula, OpenFormula};

/// How a candidate interval was obtained from its statistical statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation {
    /// The stat's target instantiated at the subject is the query itself.
    Direct,
    /// The instantiated target, with the certain evidence, entails the
    /// query; the interval weakens to [lower, 1].
    Weakened,
    /// The instantiated target entails the query's negation; the interval
    /// flips to [0, 1 − lower].
    Negated,
}

impl std::fmt::Display for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Derivation::Direct => write!(f, "direct"),
            Derivation::Weakened => write!(f, "weakened"),
            Derivation::Negated => write!(f, "negated"),
        }
    }
}

/// A reference class that bears on the query for a given subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Index into the evidence base's stat list.
    pub stat_index: usize,
    pub subject: ConstId,
    pub reference: OpenFormula,
    pub interval: ProbabilityInterval,
    pub derivation: Derivation,
}

/// Replayable record of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationTrace {
    pub query: String,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceStep {
    EntailmentCheck { formula: String, holds: bool },
    CandidateFound {
        stat: String,
        reference: String,
        derivation: Derivation,
        interval: ProbabilityInterval,
    },
    CandidatePruned { dropped: String, by: String },
    Verdict { reason: VerdictReason, interval: ProbabilityInterval },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    EntailedTrue,
    EntailedFalse,
    Hull,
    NoCandidates,
}

impl std::fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictReason::EntailedTrue => write!(f, "entailed"),
            VerdictReason::EntailedFalse => write!(f, "refuted"),
            VerdictReason::Hull => write!(f, "hull of candidates"),
            VerdictReason::NoCandidates => write!(f, "no candidates"),
        }
    }
}

impl std::fmt::Display for EvaluationTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "query {}", self.query)?;
        for s in &self.steps {
            match s {
                TraceStep::EntailmentCheck { formula, holds } => {
                    writeln!(f, "entails {formula} = {holds}")?
                }
                TraceStep::CandidateFound { stat, reference, derivation, interval } => {
                    writeln!(f, "candidate {reference} {derivation} {interval} from {stat}")?
                }
                TraceStep::CandidatePruned { dropped, by } => {
                    writeln!(f, "pruned {dropped} by more specific {by}")?
                }
                TraceStep::Verdict { reason, interval } => {
                    writeln!(f, "verdict {interval} ({reason})")?
                }
            }
        }
        Ok(())
    }
}

/// The subject of a ground query: its first-mentioned constant.
pub fn query_subject(phi: &Formula) -> Option<ConstId> {
    phi.constants().into_iter().next()
}

/// Collects direct, weakened, and negated candidates for a query.
pub fn candidates_for(base: &EvidenceBase, phi: &Formula) -> Result<Vec<Candidate>> {
    let mut trace = Vec::new();
    candidates_traced(base, phi, &mut trace)
}

fn candidates_traced(
    base: &EvidenceBase,
    phi: &Formula,
    trace: &mut Vec<TraceStep>,
) -> Result<Vec<Candidate>> {
    let Some(subject) = query_subject(phi) else {
        return Ok(Vec::new());
    };
    let sig = base.signature();
    let phi_norm = phi.normalize();
    let not_phi = Formula::not(phi.clone());
    let mut out = Vec::new();
    for (i, stat) in base.stats().iter().enumerate() {
        if !base.class_applies(&stat.reference, subject)? {
            continue;
        }
        let target = stat.target.instantiate(subject);
        let (derivation, interval) = if target.normalize() == phi_norm {
            (Derivation::Direct, stat.interval)
        } else {
            let entails_neg = base.entails_with(&[&target], &not_phi)?;
            let entails_phi = base.entails_with(&[&target], phi)?;
            if entails_neg && entails_phi {
                // target contradicts the certain evidence; carries no
                // frequency information about the query
                continue;
            } else if entails_neg {
                (
                    Derivation::Negated,
                    ProbabilityInterval::new(0.0, (1.0 - stat.interval.lower).clamp(0.0, 1.0))?,
                )
            } else if entails_phi {
                (
                    Derivation::Weakened,
                    ProbabilityInterval::new(stat.interval.lower, 1.0)?,
                )
            } else {
                continue;
            }
        };
        trace.push(TraceStep::CandidateFound {
            stat: stat.display(sig),
            reference: stat.reference.display(sig, &stat.variable),
            derivation,
            interval,
        });
        out.push(Candidate {
            stat_index: i,
            subject,
            reference: stat.reference.clone(),
            interval,
            derivation,
        });
    }
    Ok(out)
}

/// Drops a candidate whenever another candidate's reference class is
/// strictly more specific and its interval is not a superset of the
/// dropped one's. Order-independent: pruners are taken from the original
/// list, so a pruned candidate can still prune.
pub fn prune_specificity(base: &EvidenceBase, candidates: &[Candidate]) -> Result<Vec<Candidate>> {
    let mut trace = Vec::new();
    prune_traced(base, candidates, &mut trace)
}

fn prune_traced(
    base: &EvidenceBase,
    candidates: &[Candidate],
    trace: &mut Vec<TraceStep>,
) -> Result<Vec<Candidate>> {
    let sig = base.signature();
    let mut kept = Vec::new();
    for (i, c2) in candidates.iter().enumerate() {
        let mut pruned_by = None;
        for (j, c1) in candidates.iter().enumerate() {
            if i == j || c1.reference == c2.reference {
                continue;
            }
            if base.strictly_more_specific(&c1.reference, &c2.reference)?
                && !c1.interval.superset_of(&c2.interval)
            {
                pruned_by = Some(c1);
                break;
            }
        }
        match pruned_by {
            Some(c1) => trace.push(TraceStep::CandidatePruned {
                dropped: c2.reference.display(sig, "x"),
                by: c1.reference.display(sig, "x"),
            }),
            None => kept.push(c2.clone()),
        }
    }
    Ok(kept)
}

/// `[min of lowers, max of uppers]` of a nonempty collection.
pub fn interval_hull(
    intervals: impl IntoIterator<Item = ProbabilityInterval>,
) -> Result<ProbabilityInterval> {
    let mut it = intervals.into_iter();
    let first = it.next().ok_or(Error::EmptyHull)?;
    let mut lower = first.lower;
    let mut upper = first.upper;
    for i in it {
        lower = lower.min(i.lower);
        upper = upper.max(i.upper);
    }
    ProbabilityInterval::new(lower, upper)
}

/// The evidential probability of a ground sentence:
/// entailment dominates; otherwise the hull of the surviving candidates;
/// total ignorance yields [0, 1].
pub fn evidential_probability(
    base: &EvidenceBase,
    phi: &Formula,
) -> Result<(ProbabilityInterval, EvaluationTrace)> {
    let sig = base.signature();
    let mut steps = Vec::new();
    let rendered = phi.display(sig);

    let entailed = base.certain_entails(phi)?;
    steps.push(TraceStep::EntailmentCheck { formula: rendered.clone(), holds: entailed });
    if entailed {
        let iv = ProbabilityInterval::CERTAIN;
        steps.push(TraceStep::Verdict { reason: VerdictReason::EntailedTrue, interval: iv });
        return Ok((iv, EvaluationTrace { query: rendered, steps }));
    }
    let not_phi = Formula::not(phi.clone());
    let refuted = base.certain_entails(&not_phi)?;
    steps.push(TraceStep::EntailmentCheck {
        formula: not_phi.display(sig),
        holds: refuted,
    });
    if refuted {
        let iv = ProbabilityInterval::IMPOSSIBLE;
        steps.push(TraceStep::Verdict { reason: VerdictReason::EntailedFalse, interval: iv });
        return Ok((iv, EvaluationTrace { query: rendered, steps }));
    }

    let candidates = candidates_traced(base, phi, &mut steps)?;
    let surviving = if candidates.len() > 1 {
        prune_traced(base, &candidates, &mut steps)?
    } else {
        candidates
    };
    let (reason, iv) = if surviving.is_empty() {
        (VerdictReason::NoCandidates, ProbabilityInterval::VACUOUS)
    } else {
        (
            VerdictReason::Hull,
            interval_hull(surviving.iter().map(|c| c.interval))?,
        )
    };
    steps.push(TraceStep::Verdict { reason, interval: iv });
    Ok((iv, EvaluationTrace { query: rendered, steps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::EvidenceItem;
    use crate::logic::parser::{parse_formula, parse_program};
    use crate::logic::solver::DEFAULT_ATOM_BUDGET;

    fn base(text: &str) -> EvidenceBase {
        let prog = parse_program(text).unwrap();
        EvidenceBase::from_program(&prog, DEFAULT_ATOM_BUDGET).unwrap()
    }

    fn fml(b: &EvidenceBase, text: &str) -> Formula {
        let mut sig = (**b.signature()).clone();
        parse_formula(text, &mut sig).unwrap()
    }

    #[test]
    fn tweety_stage1_direct_candidate() {
        let b = base(
            "const tweety.\n\
             rule all x: penguin(x) -> bird(x).\n\
             rule all x: penguin(x) -> ~flies(x).\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             fact bird(tweety).",
        );
        let flies = fml(&b, "flies(tweety)");
        let cands = candidates_for(&b, &flies).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].derivation, Derivation::Direct);
        assert_eq!(cands[0].interval, ProbabilityInterval::new(0.95, 1.0).unwrap());
        let (iv, _) = evidential_probability(&b, &flies).unwrap();
        assert_eq!(iv, ProbabilityInterval::new(0.95, 1.0).unwrap());
    }

    #[test]
    fn tweety_stage2_refuted() {
        let b = base(
            "const tweety.\n\
             rule all x: penguin(x) -> bird(x).\n\
             rule all x: penguin(x) -> ~flies(x).\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             fact bird(tweety). fact penguin(tweety).",
        );
        let (iv, trace) = evidential_probability(&b, &fml(&b, "flies(tweety)")).unwrap();
        assert_eq!(iv, ProbabilityInterval::IMPOSSIBLE);
        assert!(matches!(
            trace.steps.last(),
            Some(TraceStep::Verdict { reason: VerdictReason::EntailedFalse, .. })
        ));
    }

    #[test]
    fn nixon_conflict_hulls_to_vacuous() {
        let b = base(
            "const nixon, smith.\n\
             stat x: pacifist(x) | quaker(x) in [0.9, 1.0].\n\
             stat x: ~pacifist(x) | republican(x) in [0.9, 1.0].\n\
             fact quaker(nixon). fact republican(nixon).",
        );
        let pac = fml(&b, "pacifist(nixon)");
        let cands = candidates_for(&b, &pac).unwrap();
        assert_eq!(cands.len(), 2);
        assert_eq!(cands[0].derivation, Derivation::Direct);
        assert_eq!(cands[1].derivation, Derivation::Negated);
        assert_eq!(
            cands[1].interval,
            ProbabilityInterval::new(0.0, 1.0 - 0.9).unwrap()
        );
        let (iv, _) = evidential_probability(&b, &pac).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert!((iv.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cohabitation_weakened_disjunction() {
        let b = base(
            "const john, smith.\n\
             rule all x: ht_toronto(x) -> ~ht_vancouver(x).\n\
             stat x: ht_toronto(x) | married(x) in [0.99, 1.0].\n\
             stat x: ht_vancouver(x) | employed(x) in [0.99, 1.0].\n\
             fact married(john). fact employed(john).",
        );
        let disj = fml(&b, "ht_toronto(john) v ht_vancouver(john)");
        let cands = candidates_for(&b, &disj).unwrap();
        assert_eq!(cands.len(), 2);
        assert!(cands.iter().all(|c| c.derivation == Derivation::Weakened));
        let (iv, _) = evidential_probability(&b, &disj).unwrap();
        assert_eq!(iv, ProbabilityInterval::new(0.99, 1.0).unwrap());
        // each disjunct alone conflicts through the exclusion rule
        let (iv_t, _) = evidential_probability(&b, &fml(&b, "ht_toronto(john)")).unwrap();
        assert_eq!(iv_t, ProbabilityInterval::new(0.0, 1.0).unwrap());
    }

    #[test]
    fn specificity_prunes_broader_class() {
        // artificial nested classes: local birds are a subclass with
        // conflicting frequency knowledge
        let b = base(
            "const tweety, other.\n\
             rule all x: local(x) -> bird(x).\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             stat x: flies(x) | local(x) in [0.0, 0.05].\n\
             fact local(tweety). fact bird(tweety).",
        );
        let flies = fml(&b, "flies(tweety)");
        let cands = candidates_for(&b, &flies).unwrap();
        assert_eq!(cands.len(), 2);
        let kept = prune_specificity(&b, &cands).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].interval, ProbabilityInterval::new(0.0, 0.05).unwrap());
        let (iv, _) = evidential_probability(&b, &flies).unwrap();
        assert_eq!(iv, ProbabilityInterval::new(0.0, 0.05).unwrap());
    }

    #[test]
    fn vacuous_specific_class_does_not_erase_information() {
        let b = base(
            "const tweety, other.\n\
             rule all x: local(x) -> bird(x).\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             stat x: flies(x) | local(x) in [0.0, 1.0].\n\
             fact local(tweety). fact bird(tweety).",
        );
        let cands = candidates_for(&b, &fml(&b, "flies(tweety)")).unwrap();
        let kept = prune_specificity(&b, &cands).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn single_candidate_unchanged_by_pruning() {
        let b = base(
            "const tweety.\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             fact bird(tweety).",
        );
        let cands = candidates_for(&b, &fml(&b, "flies(tweety)")).unwrap();
        let kept = prune_specificity(&b, &cands).unwrap();
        assert_eq!(kept, cands);
    }

    #[test]
    fn hull_examples() {
        let iv = |l, u| ProbabilityInterval::new(l, u).unwrap();
        assert_eq!(interval_hull([iv(0.9, 1.0), iv(0.0, 0.1)]).unwrap(), iv(0.0, 1.0));
        assert_eq!(interval_hull([iv(0.99, 1.0), iv(0.99, 1.0)]).unwrap(), iv(0.99, 1.0));
        assert_eq!(interval_hull([iv(0.2, 0.4)]).unwrap(), iv(0.2, 0.4));
        assert_eq!(
            interval_hull(Vec::<ProbabilityInterval>::new()),
            Err(Error::EmptyHull)
        );
    }

    #[test]
    fn ignorance_is_vacuous() {
        let b = base("const a. pred q/1. fact p(a).");
        let (iv, trace) = evidential_probability(&b, &fml(&b, "q(a)")).unwrap();
        assert_eq!(iv, ProbabilityInterval::VACUOUS);
        assert!(matches!(
            trace.steps.last(),
            Some(TraceStep::Verdict { reason: VerdictReason::NoCandidates, .. })
        ));
    }

    #[test]
    fn determinism_of_traces() {
        let b = base(
            "const nixon, smith.\n\
             stat x: pacifist(x) | quaker(x) in [0.9, 1.0].\n\
             stat x: ~pacifist(x) | republican(x) in [0.9, 1.0].\n\
             fact quaker(nixon). fact republican(nixon).",
        );
        let pac = fml(&b, "pacifist(nixon)");
        let (iv1, t1) = evidential_probability(&b, &pac).unwrap();
        let (iv2, t2) = evidential_probability(&b, &pac).unwrap();
        assert_eq!(iv1, iv2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn weakened_candidates_are_sound() {
        let b = base(
            "const john, smith.\n\
             rule all x: ht_toronto(x) -> ~ht_vancouver(x).\n\
             stat x: ht_toronto(x) | married(x) in [0.99, 1.0].\n\
             stat x: ht_vancouver(x) | employed(x) in [0.99, 1.0].\n\
             fact married(john). fact employed(john).",
        );
        let disj = fml(&b, "ht_toronto(john) v ht_vancouver(john)");
        for c in candidates_for(&b, &disj).unwrap() {
            if c.derivation == Derivation::Weakened {
                let s = &b.stats()[c.stat_index];
                assert_eq!(c.interval.lower, s.interval.lower);
                assert_eq!(c.interval.upper, 1.0);
                let target = s.target.instantiate(c.subject);
                assert!(b.entails_with(&[&target], &disj).unwrap());
            }
        }
    }

    #[test]
    fn some_evidence_item_roundtrip_keeps_probability() {
        let b = base(
            "const tweety. pred song/1.\n\
             stat x: flies(x) | bird(x) in [0.95, 1.0].\n\
             fact bird(tweety).",
        );
        let flies = fml(&b, "flies(tweety)");
        let (before, _) = evidential_probability(&b, &flies).unwrap();
        let extra = fml(&b, "song(tweety)");
        let b2 = b.assert_evidence(EvidenceItem::Sentence(extra.clone())).unwrap();
        let b3 = b2.retract_evidence(&EvidenceItem::Sentence(extra)).unwrap();
        let (after, _) = evidential_probability(&b3, &flies).unwrap();
        assert_eq!(before, after);
    }
}
