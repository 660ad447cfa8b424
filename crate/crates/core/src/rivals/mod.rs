//! Desk-scale implementations of the two rival formalisms: Reiter
//! default-logic extensions and the McCarthy–Hayes operator rule system.

mod defaults;
mod mh;

pub use defaults::{
    compute_extensions, is_extension, DefaultRule, DefaultTheory, Extension, MAX_DEFAULTS,
};
pub use mh::{mh_derive, replay_trace, DerivationTrace, MhSentence, MhStep, Wrapper};
