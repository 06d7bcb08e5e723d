use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::dense::QuasiPolynomial;
use crate::arith::rational::RatSum;
use crate::arith::{AffineForm, ParamPoly, RatAffine};
use crate::engine::constraint::ConstraintSet;
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::univar::{summand_period, Denumerant};

/// `[congruences(b)] * coef(b) * D_alpha(arg(b))`.
#[derive(Clone, Debug)]
pub struct SparseTerm {
    pub congruences: ConstraintSet,
    pub coef: ParamPoly,
    pub arg: RatAffine,
    pub denumerant: Arc<Denumerant>,
}

impl SparseTerm {
    pub fn eval(&self, b: &[i64]) -> Result<BigRational> {
        let mut s = RatSum::default();
        self.add_to(&mut s, b)?;
        Ok(s.finish())
    }

    fn add_to(&self, acc: &mut RatSum, b: &[i64]) -> Result<()> {
        if !self.congruences.holds(b)? {
            return Ok(());
        }
        let c = self.coef.eval(b);
        if c.is_zero() {
            return Ok(());
        }
        let n = self.arg.eval_int(b)?;
        acc.add_scaled(&c, &self.denumerant.eval(n));
        Ok(())
    }

    pub fn period(&self, nparams: usize) -> Vec<u64> {
        summand_period(self.congruences.items().iter(), &self.arg, &self.denumerant, nparams)
    }

    pub fn degree_bound(&self) -> u32 {
        self.coef.degree().unwrap_or(0) + self.denumerant.degree_bound()
    }

    fn compose(&self, subs: &[AffineForm], nout: usize) -> Option<SparseTerm> {
        let rat: Vec<RatAffine> = subs.iter().cloned().map(RatAffine::integral).collect();
        Some(SparseTerm {
            congruences: self.congruences.compose(subs)?,
            coef: self.coef.compose(&rat, nout),
            arg: self.arg.compose(subs),
            denumerant: self.denumerant.clone(),
        })
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut s = String::new();
        if !self.congruences.is_empty() {
            s.push_str(&format!("[{}] ", self.congruences.render(names)));
        }
        s.push_str(&format!("({})", self.coef.render(names)));
        if self.denumerant.parts() > 0 {
            s.push_str(&format!("*{}({})", self.denumerant.render(), self.arg.render(names)));
        }
        s
    }
}

/// A quasi-polynomial kept as a sum of congruence-guarded denumerant
/// terms; used when the residue table would be too large.
#[derive(Clone, Debug)]
pub struct SparseQP {
    params: Vec<String>,
    terms: Vec<Arc<SparseTerm>>,
}

impl SparseQP {
    /// Merges terms with equal congruences, argument and denumerant.
    pub fn new(params: Vec<String>, terms: impl IntoIterator<Item = SparseTerm>) -> Self {
        let mut acc: BTreeMap<(ConstraintSet, RatAffine, Vec<(u64, u32)>), SparseTerm> = BTreeMap::new();
        for t in terms {
            let key = (t.congruences.clone(), t.arg.clone(), t.denumerant.alphas().to_vec());
            match acc.get_mut(&key) {
                Some(e) => e.coef.add_assign(&t.coef),
                None => {
                    acc.insert(key, t);
                }
            }
        }
        let terms = acc.into_values().filter(|t| !t.coef.is_zero()).map(Arc::new).collect();
        SparseQP { params, terms }
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    pub fn terms(&self) -> &[Arc<SparseTerm>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, b: &[i64]) -> Result<BigRational> {
        if b.len() != self.nparams() {
            return Err(Error::DimensionMismatch { expected: self.nparams(), got: b.len() });
        }
        let mut s = RatSum::default();
        for t in &self.terms {
            t.add_to(&mut s, b)?;
        }
        Ok(s.finish())
    }

    /// A (not necessarily minimal) period: the lcm of the term periods.
    pub fn period(&self) -> Vec<u64> {
        let mut p = vec![1u64; self.nparams()];
        for t in &self.terms {
            for (a, b) in p.iter_mut().zip(t.period(self.nparams())) {
                *a = a.lcm(&b);
            }
        }
        p
    }

    /// Upper bound on the degree.
    pub fn degree_bound(&self) -> u32 {
        self.terms.iter().map(|t| t.degree_bound()).max().unwrap_or(0)
    }

    /// Number of sparse-sum evaluations a dense fit needs, saturating.
    pub fn dense_cost(&self) -> u128 {
        let classes: u128 = self.period().iter().fold(1u128, |acc, &p| acc.saturating_mul(p as u128));
        let grid = (self.degree_bound() as u128 + 1).saturating_pow(self.nparams() as u32);
        classes.saturating_mul(grid)
    }

    /// Exact residue table by interpolation.
    pub fn to_dense(&self, mode: Parallelism) -> Result<QuasiPolynomial> {
        QuasiPolynomial::fit(self.params.clone(), self.period(), self.degree_bound(), mode, |b| self.eval(b))
    }

    pub fn compose_affine(&self, subs: &[AffineForm], new_params: Vec<String>) -> Result<Self> {
        if subs.len() != self.nparams() {
            return Err(Error::DimensionMismatch { expected: self.nparams(), got: subs.len() });
        }
        let n = new_params.len();
        let terms: Vec<SparseTerm> = self.terms.iter().filter_map(|t| t.compose(subs, n)).collect();
        Ok(SparseQP::new(new_params, terms))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| SparseTerm { coef: t.coef.scale(k), ..(**t).clone() })
            .collect::<Vec<_>>();
        SparseQP::new(self.params.clone(), terms)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|t| t.render(&self.params)).collect::<Vec<_>>().join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::qi;

    #[test]
    fn floor_half_as_denumerant() {
        // D_{1,2}(b) = floor(b/2) + 1
        let d = Arc::new(Denumerant::new(&[(1, 1), (2, 1)]).unwrap());
        let t = SparseTerm {
            congruences: ConstraintSet::new(),
            coef: ParamPoly::one(1),
            arg: RatAffine::integral(AffineForm::var(0)),
            denumerant: d,
        };
        let q = SparseQP::new(vec!["b".into()], [t.clone(), t]);
        assert_eq!(q.terms().len(), 1);
        assert_eq!(q.eval(&[7]).unwrap(), qi(8));
        let dense = q.to_dense(Parallelism::Sequential).unwrap();
        assert_eq!(dense.period(), &[2]);
        for b in -6..20 {
            assert_eq!(dense.eval(&[b]).unwrap(), q.eval(&[b]).unwrap());
        }
        let shifted = q.compose_affine(&[AffineForm::new([(0, 2)], 1)], vec!["t".into()]).unwrap();
        assert_eq!(shifted.eval(&[3]).unwrap(), qi(8));
    }
}
