//! Evidential probability with threshold acceptance, plus rival
//! non-monotonic formalisms (Reiter defaults, McCarthy–Hayes operator
//! rules) for side-by-side comparison on the classic benchmark scenarios.
//!
//! The pipeline: a ground propositional evidence base ([`EvidenceBase`])
//! holding certain sentences and statistical statements; an evaluator
//! ([`evidential_probability`]) assigning every sentence an interval via
//! reference-class candidates, specificity pruning, and interval hull; a
//! threshold rule ([`acceptance`]) building the possibly-inconsistent
//! corpus of accepted sentences over an explicit finite universe; and
//! prepackaged [`scenarios`] reproducing the worked examples with
//! machine-checked expected results.

pub mod acceptance;
pub mod ep;
pub mod error;
pub mod evidence;
pub mod logic;
pub mod rivals;
pub mod scenarios;

pub use acceptance::{
    accepted_set, corpus_report, is_accepted, serious_possibility, update_diff,
    AcceptanceLevel, Corpus, CorpusReport, Universe,
};
pub use ep::{evidential_probability, Candidate, Derivation, EvaluationTrace};
pub use error::{Error, Result};
pub use evidence::{EvidenceBase, EvidenceItem, ProbabilityInterval, StatisticalStatement};
pub use logic::{Atom, Formula, Signature, Theory};
pub use rivals::{
    compute_extensions, is_extension, mh_derive, DefaultRule, DefaultTheory, DerivationTrace,
    Extension,
};
pub use scenarios::{build_scenario, expected_utility_comparison, Scenario};
