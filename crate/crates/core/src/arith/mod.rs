//! Exact arithmetic: rationals, affine exponent forms, parameter polynomials
//! and the term representation of generating functions.

pub mod affine;
pub mod factor;
pub mod fm;
pub mod poly;
pub mod rational;
pub mod series;
pub mod term;

pub use affine::{AffineForm, RatAffine};
pub use factor::{FactorAtom, FactorKind};
pub use poly::{Monomial, ParamPoly};
pub use rational::{format_rational, parse_rational, q, qi, Q};
pub use series::{inverse_series, partition_counts, series_coefficient, weighted_inverse_series};
pub use term::{term_eval, GFExpression, GFTerm};
