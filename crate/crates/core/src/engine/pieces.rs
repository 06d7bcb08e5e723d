//! From the guarded denumerant sum to pieces.
//!
//! The sign guards of the final summands cut the cone of the matrix into
//! open cells. Inside a cell each guard is decided far from the walls, so
//! the sum of the summands whose guards point into the cell is a single
//! quasi-polynomial there, and it extends to the closed cell.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cells::{arrangement_cells, cone_facets, primitive};
use super::constraint::{CaseConstraint, ConstraintSet};
use super::system::SystemMatrix;
use super::{run_elimination, EliminationReport, EngineOptions, Parameterization};
use crate::arith::AffineForm;
use crate::error::{Error, Result};
use crate::par;
use crate::quasipoly::{param_names, Kind, Piece, PieceQP, PiecewiseQP, QuasiPolynomial, SparseQP, SparseTerm, MAX_RESIDUE_CLASSES};
use crate::univar::FinalTerm;

/// Summand evaluations a dense fit may spend before a piece is kept as a
/// sparse sum instead.
pub const DENSE_BUDGET: u128 = 3_000_000;

const SPOT_CHECKS: usize = 32;

#[derive(Clone, Debug)]
pub struct Computation {
    pub result: PiecewiseQP,
    pub report: EliminationReport,
}

fn sparse_term(t: &FinalTerm) -> SparseTerm {
    SparseTerm {
        congruences: ConstraintSet::from_constraints(t.guards.congruences().cloned()).expect("canonical congruences"),
        coef: t.coef.clone(),
        arg: t.arg.clone(),
        denumerant: t.denumerant.clone(),
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense table when affordable, else the sparse sum itself.
///
/// `cap` is a known multiple of the true period (the minor lcm); the fit
/// uses the gcd of it with the summands' lcm period, and the result is
/// spot-checked against the sparse sum before it replaces it.
fn finish(sparse: SparseQP, cap: Option<u64>, opts: &EngineOptions) -> Result<PieceQP> {
    let mut period = sparse.period();
    if let Some(c) = cap {
        period.iter_mut().for_each(|p| *p = p.gcd(&c));
    }
    let classes: u128 = period.iter().map(|&p| p as u128).product();
    let grid = (sparse.degree_bound() as u128 + 1).pow(sparse.nparams() as u32);
    let cost = classes * grid * sparse.terms().len().max(1) as u128;
    if classes > MAX_RESIDUE_CLASSES as u128 || cost > DENSE_BUDGET {
        return Ok(PieceQP::Sparse(sparse));
    }
    let dense = QuasiPolynomial::fit(
        sparse.params().to_vec(),
        period,
        sparse.degree_bound(),
        opts.parallelism,
        |b| sparse.eval(b),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xd3a5e);
    for _ in 0..SPOT_CHECKS {
        let b: Vec<i64> = (0..sparse.nparams()).map(|_| rng.random_range(-60..=120)).collect();
        if dense.eval(&b)? != sparse.eval(&b)? {
            return Ok(PieceQP::Sparse(sparse));
        }
    }
    Ok(PieceQP::Dense(dense))
}

/// `phi_A` as pieces over the right-hand side `b`.
pub fn symbolic(a: &SystemMatrix, opts: &EngineOptions) -> Result<Computation> {
    let rr = a.row_reduction();
    let ared = a.select_rows(&rr.independent);
    let n = ared.m();
    let names = param_names(a.m());
    let reduced_names: Vec<String> = rr.independent.iter().map(|&i| names[i].clone()).collect();
    let el = run_elimination(&ared, &Parameterization::SymbolicB, opts)?;

    let mut walls: BTreeSet<Vec<i64>> = BTreeSet::new();
    for t in &el.terms {
        for g in t.guards.signs() {
            if let Some(p) = primitive(&g.form.dense_coeffs(n)) {
                walls.insert(p);
            }
        }
    }
    let walls: Vec<Vec<i64>> = walls.into_iter().collect();
    let facets = cone_facets(&ared.columns(), n);
    let cells = arrangement_cells(&facets, &walls, n, opts.parallelism);
    let cap = ared.minor_lcm();

    // b_reduced = b restricted to the independent rows
    let subs: Vec<AffineForm> = rr.independent.iter().map(|&i| AffineForm::var(i)).collect();
    let equalities: Vec<CaseConstraint> = rr
        .equalities
        .iter()
        .flat_map(|e| [CaseConstraint::ge0(e.clone()), CaseConstraint::ge0(e.scale(-1))])
        .collect();

    let pieces = par::try_map(opts.parallelism, &cells, |cell| -> Result<Piece> {
        let active = el.terms.iter().filter(|t| t.guards.signs().all(|g| dot(&g.form.dense_coeffs(n), &cell.interior) > 0));
        let sparse = SparseQP::new(reduced_names.clone(), active.map(sparse_term));
        let qp = finish(sparse, Some(cap), opts)?;
        let region = ConstraintSet::from_constraints(
            cell.walls.iter().map(|w| CaseConstraint::ge0(AffineForm::from_dense(w, 0))),
        )
        .expect("walls of a nonempty cell");
        if rr.equalities.is_empty() {
            return Ok(Piece { constraints: region, qp });
        }
        let constraints = region
            .compose(&subs)
            .and_then(|c| equalities.iter().try_fold(c, |acc, e| acc.with(e.clone())))
            .ok_or_else(|| Error::Malformed("contradictory piece constraints".into()))?;
        Ok(Piece { constraints, qp: qp.compose_affine(&subs, names.clone())? })
    })?;
    Ok(Computation {
        result: PiecewiseQP::new(a.clone(), Kind::Piecewise, names, pieces),
        report: el.report,
    })
}

/// `phi_A(b)` at one point from the guarded sum, without building pieces.
pub fn count(a: &SystemMatrix, b: &[i64], opts: &EngineOptions) -> Result<BigRational> {
    if b.len() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), got: b.len() });
    }
    if b.iter().any(|&x| x < 0) {
        return Ok(BigRational::zero());
    }
    let rr = a.row_reduction();
    for e in &rr.equalities {
        if e.eval(b)? != 0 {
            return Ok(BigRational::zero());
        }
    }
    let ared = a.select_rows(&rr.independent);
    let br: Vec<i64> = rr.independent.iter().map(|&i| b[i]).collect();
    run_elimination(&ared, &Parameterization::SymbolicB, opts)?.eval(&br)
}

/// `t -> phi_A(t * b0)` as a single quasi-polynomial, valid for `t >= 1`
/// (and at `t = 0` unless the dilated polytope is empty).
pub fn ehrhart(a: &SystemMatrix, b0: &[i64], opts: &EngineOptions) -> Result<Computation> {
    if b0.len() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), got: b0.len() });
    }
    let params = vec!["t".to_string()];
    let single = |qp: PieceQP, report| Computation {
        result: PiecewiseQP::new(
            a.clone(),
            Kind::Single,
            params.clone(),
            vec![Piece { constraints: ConstraintSet::new(), qp }],
        ),
        report,
    };
    let rr = a.row_reduction();
    if rr.equalities.iter().any(|e| e.eval(b0).map(|v| v != 0).unwrap_or(true)) {
        let zero = SparseQP::new(params.clone(), []);
        return Ok(single(finish(zero, None, opts)?, EliminationReport::default()));
    }
    let ared = a.select_rows(&rr.independent);
    let b0r: Vec<i64> = rr.independent.iter().map(|&i| b0[i]).collect();
    let el = run_elimination(&ared, &Parameterization::Dilation(b0r), opts)?;
    let active = el.terms.iter().filter(|t| t.guards.signs().all(|g| g.form.coeff(0) > 0));
    let sparse = SparseQP::new(params.clone(), active.map(sparse_term));
    Ok(single(finish(sparse, Some(ared.minor_lcm()), opts)?, el.report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{q, qi};
    use crate::oracle::brute_table;

    fn worked() -> SystemMatrix {
        SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap()
    }

    fn osc(a: i64) -> BigRational {
        q(7 + if a % 2 == 0 { 1 } else { -1 }, 8)
    }

    #[test]
    fn worked_example_has_three_chambers() {
        let c = symbolic(&worked(), &EngineOptions::default()).unwrap();
        let pw = &c.result;
        assert_eq!(pw.pieces.len(), 3);
        let t = brute_table(&worked(), &[30, 30], 1 << 22).unwrap();
        for x in -5..=30 {
            for y in -5..=30 {
                assert_eq!(pw.eval(&[x, y]).unwrap(), BigRational::from_integer(t.get(&[x, y]).into()));
            }
        }
        for a in 0..=30i64 {
            for b in 0..=30i64 {
                let f1 = q(a * a, 4) + qi(a) + osc(a);
                let f2 = qi(a * b) - q(a * a, 4) - q(b * b, 2) + q(a + b, 2) + osc(a);
                let f3 = q(b * b + 3 * b + 2, 2);
                for p in &pw.pieces {
                    let v = p.qp.eval(&[a, b]).unwrap();
                    assert!(v == f1 || v == f2 || v == f3);
                }
            }
        }
    }

    #[test]
    fn worked_ehrhart() {
        let c = ehrhart(&worked(), &[5, 4], &EngineOptions::default()).unwrap();
        let qp = c.result.pieces[0].qp.dense().unwrap().clone();
        assert_eq!(qp.period(), &[2]);
        assert_eq!(qp.degree(), Some(2));
        assert_eq!(crate::quasipoly::render_qp(&qp), "23*t^2/4 + 9*t/2 + (7 + (−1)^t)/8");
        assert_eq!(qp.eval(&[1]).unwrap(), qi(11));
        assert_eq!(qp.eval(&[2]).unwrap(), qi(33));
    }

    #[test]
    fn one_row_piece_keeps_its_ray() {
        let a = SystemMatrix::new(vec![vec![1, 2]]).unwrap();
        let c = symbolic(&a, &EngineOptions::default()).unwrap();
        assert_eq!(c.result.pieces.len(), 1);
        for b in -6..0 {
            assert!(c.result.eval(&[b]).unwrap().is_zero());
        }
        let flat = SystemMatrix::new(vec![vec![1], vec![0]]).unwrap();
        let c = symbolic(&flat, &EngineOptions::default()).unwrap();
        assert!(c.result.eval(&[-3, 0]).unwrap().is_zero());
        assert_eq!(c.result.eval(&[3, 0]).unwrap(), qi(1));
    }

    #[test]
    fn dependent_rows() {
        let a = SystemMatrix::new(vec![vec![1, 1, 2], vec![2, 2, 4]]).unwrap();
        let c = symbolic(&a, &EngineOptions::default()).unwrap();
        let t = brute_table(&a, &[12, 24], 1 << 20).unwrap();
        for x in -2..=12 {
            for y in -2..=24 {
                assert_eq!(c.result.eval(&[x, y]).unwrap(), BigRational::from_integer(t.get(&[x, y]).into()));
            }
        }
        let e = ehrhart(&a, &[1, 3], &EngineOptions::default()).unwrap();
        assert!(e.result.pieces[0].qp.is_zero());
    }
}
