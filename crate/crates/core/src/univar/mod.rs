//! Constant terms of one-variable expressions: denumerant quasi-polynomials
//! and their use in the last elimination step.

mod denumerant;
mod leaf;

pub use denumerant::{denumerant_qp, qp_from_samples, Denumerant};
pub use leaf::{const_term_leaf, final_terms, summand_period, DenumerantCache, FinalTerm, FinalVerifier};
