use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared constant `{0}`")]
    UndeclaredConstant(String),
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("arity mismatch for predicate `{name}`: declared {declared}, used with {used}")]
    ArityMismatch {
        name: String,
        declared: usize,
        used: usize,
    },
    #[error("invalid probability interval [{lower}, {upper}]")]
    BadInterval { lower: f64, upper: f64 },
    #[error("atom budget exceeded: {atoms} ground atoms, budget {budget}")]
    AtomBudgetExceeded { atoms: usize, budget: usize },
    #[error("evidence would become inconsistent: {0}")]
    InconsistentEvidence(String),
    #[error("item not present in evidence base: {0}")]
    ItemNotPresent(String),
    #[error("interval hull of an empty collection")]
    EmptyHull,
    #[error("minimal_inconsistent_subsets called on a consistent theory")]
    TheoryConsistent,
    #[error("default theory too large: {0} defaults (bound 20)")]
    DefaultBound(usize),
    #[error("invalid acceptance level epsilon={0}: must be in (0, 0.5)")]
    BadEpsilon(f64),
    #[error("invalid scenario parameters: {0}")]
    InvalidScenario(String),
    #[error("enumeration oracle limit exceeded: {0} atoms (limit 20)")]
    OracleLimit(usize),
    #[error("query mentions an undeclared name `{0}`")]
    UnknownName(String),
}
