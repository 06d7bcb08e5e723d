//! Quasi-polynomials: dense residue tables, sparse denumerant sums and
//! piecewise assemblies with text and JSON forms.

mod dense;
mod piecewise;
mod render;
mod sparse;

pub use dense::{residues, QuasiPolynomial, MAX_RESIDUE_CLASSES};
pub use piecewise::{param_names, Kind, Piece, PieceQP, PiecewiseQP};
pub use render::{from_json, render_piece_qp, render_qp, render_text, to_json, JSON_VERSION};
pub use sparse::{SparseQP, SparseTerm};
