use num_rational::BigRational;
use num_traits::{One, Zero};

use super::dense::QuasiPolynomial;
use super::sparse::SparseQP;
use crate::arith::AffineForm;
use crate::engine::constraint::ConstraintSet;
use crate::engine::system::SystemMatrix;
use crate::error::{Error, Result};

/// Parameter names used for right-hand sides with `m` rows.
pub fn param_names(m: usize) -> Vec<String> {
    match m {
        1 => vec!["b".into()],
        2 => vec!["a".into(), "b".into()],
        3 => vec!["a".into(), "b".into(), "c".into()],
        _ => (1..=m).map(|i| format!("b{i}")).collect(),
    }
}

/// A piece's quasi-polynomial: a residue table, or a denumerant sum when
/// the table would be too large to build.
#[derive(Clone, Debug)]
pub enum PieceQP {
    Dense(QuasiPolynomial),
    Sparse(SparseQP),
}

impl PieceQP {
    pub fn eval(&self, b: &[i64]) -> Result<BigRational> {
        match self {
            PieceQP::Dense(q) => q.eval(b),
            PieceQP::Sparse(q) => q.eval(b),
        }
    }

    pub fn params(&self) -> &[String] {
        match self {
            PieceQP::Dense(q) => q.params(),
            PieceQP::Sparse(q) => q.params(),
        }
    }

    /// Exact degree for a table, an upper bound for a sparse sum.
    pub fn degree(&self) -> u32 {
        match self {
            PieceQP::Dense(q) => q.degree().unwrap_or(0),
            PieceQP::Sparse(q) => q.degree_bound(),
        }
    }

    /// Minimal period for a table, a multiple of it for a sparse sum.
    pub fn period(&self) -> Vec<u64> {
        match self {
            PieceQP::Dense(q) => q.period().to_vec(),
            PieceQP::Sparse(q) => q.period(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PieceQP::Dense(q) => q.is_zero(),
            PieceQP::Sparse(q) => q.is_zero(),
        }
    }

    pub fn dense(&self) -> Option<&QuasiPolynomial> {
        match self {
            PieceQP::Dense(q) => Some(q),
            PieceQP::Sparse(_) => None,
        }
    }

    pub fn compose_affine(&self, subs: &[AffineForm], new_params: Vec<String>) -> Result<PieceQP> {
        Ok(match self {
            PieceQP::Dense(q) => PieceQP::Dense(q.compose_affine(subs, new_params)?),
            PieceQP::Sparse(q) => PieceQP::Sparse(q.compose_affine(subs, new_params)?),
        })
    }

    pub fn scale(&self, k: &BigRational) -> PieceQP {
        match self {
            PieceQP::Dense(q) => PieceQP::Dense(q.scale(k)),
            PieceQP::Sparse(q) => PieceQP::Sparse(q.scale(k)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Piece {
    /// Closed region (sign constraints, plus equalities as pairs of
    /// inequalities) on which `qp` is the counting function.
    pub constraints: ConstraintSet,
    pub qp: PieceQP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Pieces over `b` with chamber constraints.
    Piecewise,
    /// One quasi-polynomial in a dilation parameter, no constraints.
    Single,
}

/// A counting function given piece by piece. At a point the value is that
/// of any piece whose constraints hold (they agree); where none holds it
/// is 0.
#[derive(Clone, Debug)]
pub struct PiecewiseQP {
    pub matrix: SystemMatrix,
    pub kind: Kind,
    pub params: Vec<String>,
    pub pieces: Vec<Piece>,
}

impl PiecewiseQP {
    /// Pieces sorted by their canonical constraint sets.
    pub fn new(matrix: SystemMatrix, kind: Kind, params: Vec<String>, mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by(|a, b| a.constraints.cmp(&b.constraints));
        PiecewiseQP { matrix, kind, params, pieces }
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    /// Indices of the pieces whose constraints hold at `b`.
    pub fn applicable(&self, b: &[i64]) -> Result<Vec<usize>> {
        if b.len() != self.nparams() {
            return Err(Error::DimensionMismatch { expected: self.nparams(), got: b.len() });
        }
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if p.constraints.holds(b)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Value at `b`, checking that all applicable pieces agree.
    pub fn eval(&self, b: &[i64]) -> Result<BigRational> {
        let idx = self.applicable(b)?;
        let mut value: Option<BigRational> = None;
        for i in idx {
            let v = self.pieces[i].qp.eval(b)?;
            match &value {
                None => value = Some(v),
                Some(w) if *w == v => {}
                Some(w) => {
                    return Err(Error::PieceDisagreement {
                        point: b.to_vec(),
                        detail: format!("piece {} gives {v}, an earlier piece gives {w}", i + 1),
                    })
                }
            }
        }
        Ok(value.unwrap_or_else(BigRational::zero))
    }

    /// Value at `b` from the first applicable piece only.
    pub fn eval_first(&self, b: &[i64]) -> Result<BigRational> {
        match self.applicable(b)?.first() {
            Some(&i) => self.pieces[i].qp.eval(b),
            None => Ok(BigRational::zero()),
        }
    }

    /// `d - rank A`: the degree bound and the reciprocity sign exponent.
    pub fn expected_degree(&self) -> u32 {
        (self.matrix.d() - self.matrix.rank()) as u32
    }

    /// `b -> -b - r` with `r` the row sums of the matrix; `t -> -t` for a
    /// single dilation quasi-polynomial.
    pub fn reflection(&self) -> Vec<AffineForm> {
        match self.kind {
            Kind::Piecewise => {
                let r = self.matrix.row_sums();
                (0..self.nparams()).map(|i| AffineForm::new([(i, -1)], -r[i])).collect()
            }
            Kind::Single => (0..self.nparams()).map(|i| AffineForm::new([(i, -1)], 0)).collect(),
        }
    }

    /// A piece `j` with `q_i(b) = (-1)^{d - rank} q_j(reflection(b))` at
    /// every given point, trying `j = i` first.
    pub fn reciprocity_partner(&self, i: usize, points: &[Vec<i64>]) -> Result<Option<usize>> {
        let subs = self.reflection();
        let odd = self.expected_degree() % 2 == 1;
        let mut lhs = Vec::with_capacity(points.len());
        let mut images = Vec::with_capacity(points.len());
        for b in points {
            let v = self.pieces[i].qp.eval(b)?;
            lhs.push(if odd { -v } else { v });
            images.push(subs.iter().map(|f| f.eval(b)).collect::<Result<Vec<i64>>>()?);
        }
        let order = std::iter::once(i).chain((0..self.pieces.len()).filter(|&j| j != i));
        'candidates: for j in order {
            for (v, x) in lhs.iter().zip(&images) {
                if self.pieces[j].qp.eval(x)? != *v {
                    continue 'candidates;
                }
            }
            return Ok(Some(j));
        }
        Ok(None)
    }

    /// Every piece `q` becomes `(-1)^{d - rank} q(-b - r)`, constraints
    /// mapped through the same substitution. For counting functions the
    /// result describes the interior counts shifted by `r`; for a dilation
    /// quasi-polynomial of a polytope of dimension `d - rank` it is the
    /// interior Ehrhart quasi-polynomial.
    pub fn reciprocity_transform(&self) -> Result<PiecewiseQP> {
        let subs = self.reflection();
        let sign = if self.expected_degree() % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let Some(constraints) = p.constraints.compose(&subs) else { continue };
            let qp = p.qp.compose_affine(&subs, self.params.clone())?.scale(&sign);
            pieces.push(Piece { constraints, qp });
        }
        Ok(PiecewiseQP::new(self.matrix.clone(), self.kind, self.params.clone(), pieces))
    }
}
