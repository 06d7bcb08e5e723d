use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use super::affine::RatAffine;
use super::factor::{rational_pow, render_z_monomial, FactorAtom, FactorKind};
use super::poly::ParamPoly;
use crate::error::{Error, Result};

/// One summand `c(b) * z^{E(b)} / prod(factors)` of a generating function.
///
/// Negative exponents encode the `z^{-b}` denominator of the constant-term
/// formulation; there is no separate monomial-denominator field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GFTerm {
    pub coefficient: ParamPoly,
    pub exponents: Vec<RatAffine>,
    pub denominator: Vec<FactorAtom>,
}

impl GFTerm {
    pub fn new(coefficient: ParamPoly, exponents: Vec<RatAffine>, denominator: Vec<FactorAtom>) -> Self {
        GFTerm { coefficient, exponents, denominator: canonical_denominator(denominator) }
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn involves(&self, var: usize) -> bool {
        !self.exponents[var].is_zero() || self.denominator.iter().any(|f| f.involves(var))
    }

    /// Exact value at a rational point `z` and integer parameters `b`.
    pub fn eval(&self, z: &[BigRational], b: &[i64]) -> Result<BigRational> {
        let mut v = self.coefficient.eval(b);
        if v.is_zero() {
            return Ok(v);
        }
        for (i, e) in self.exponents.iter().enumerate() {
            let e = e.eval_int(b)?;
            if e != 0 {
                let x = z.get(i).ok_or(Error::MissingParameter(i))?;
                v *= rational_pow(x, e)?;
            }
        }
        for f in &self.denominator {
            let d = f.value(z)?;
            if d.is_zero() {
                return Err(Error::VanishingDenominator);
            }
            v /= d;
        }
        Ok(v)
    }

    pub fn render(&self, param_names: &[String], var_names: &[&str]) -> String {
        let mut num = String::new();
        let exps: Vec<String> = self
            .exponents
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(i, e)| {
                let n = var_names.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("z{}", i + 1));
                format!("{n}^({})", e.render(param_names))
            })
            .collect();
        num.push_str(&format!("({})", self.coefficient.render(param_names)));
        for e in exps {
            num.push('*');
            num.push_str(&e);
        }
        if self.denominator.is_empty() {
            num
        } else {
            let den: Vec<String> = self.denominator.iter().map(|f| f.render(var_names)).collect();
            format!("{num} / ({})", den.join(""))
        }
    }
}

impl fmt::Display for GFTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[], &[]))
    }
}

/// Sorts factors by (kind, vector) and merges equal ones into multiplicities.
pub fn canonical_denominator(factors: Vec<FactorAtom>) -> Vec<FactorAtom> {
    let mut acc: BTreeMap<(FactorKind, Vec<i64>), u32> = BTreeMap::new();
    for f in factors {
        *acc.entry((f.kind, f.vector)).or_insert(0) += f.multiplicity;
    }
    acc.into_iter()
        .map(|((kind, vector), multiplicity)| FactorAtom { kind, vector, multiplicity })
        .collect()
}

/// A sum of terms; the working state of the elimination.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GFExpression {
    pub terms: Vec<GFTerm>,
}

impl GFExpression {
    pub fn new(terms: Vec<GFTerm>) -> Self {
        GFExpression { terms }
    }

    pub fn eval(&self, z: &[BigRational], b: &[i64]) -> Result<BigRational> {
        let mut s = BigRational::zero();
        for t in &self.terms {
            s += t.eval(z, b)?;
        }
        Ok(s)
    }

    /// Merges terms that differ only in their coefficient, drops zero terms
    /// and sorts the rest.
    pub fn canonicalize(self) -> Self {
        let mut acc: BTreeMap<(Vec<RatAffine>, Vec<FactorAtom>), ParamPoly> = BTreeMap::new();
        for t in self.terms {
            let key = (t.exponents, canonical_denominator(t.denominator));
            match acc.get_mut(&key) {
                Some(c) => c.add_assign(&t.coefficient),
                None => {
                    acc.insert(key, t.coefficient);
                }
            }
        }
        GFExpression {
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((exponents, denominator), coefficient)| GFTerm { coefficient, exponents, denominator })
                .collect(),
        }
    }

    pub fn render(&self, param_names: &[String], var_names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|t| t.render(param_names, var_names)).collect::<Vec<_>>().join("\n  + ")
    }
}

/// Exact value of a single term; see [`GFTerm::eval`].
pub fn term_eval(term: &GFTerm, zpoint: &[BigRational], assignment: &[i64]) -> Result<BigRational> {
    term.eval(zpoint, assignment)
}

/// Convenience for rendering a z-monomial in messages.
pub fn z_monomial(v: &[i64]) -> String {
    render_z_monomial(v, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::affine::AffineForm;
    use crate::arith::rational::{q, qi};

    fn one_var_term(exp: i64, den: Vec<FactorAtom>) -> GFTerm {
        GFTerm::new(ParamPoly::one(1), vec![RatAffine::constant(exp)], den)
    }

    #[test]
    fn geometric_factor_value() {
        let t = one_var_term(0, vec![FactorAtom::binomial(vec![1], 1)]);
        assert_eq!(term_eval(&t, &[q(1, 2)], &[]).unwrap(), qi(2));
    }

    #[test]
    fn parametric_exponent_value() {
        let t = GFTerm::new(
            ParamPoly::one(1),
            vec![RatAffine::integral(AffineForm::var(0))],
            vec![FactorAtom::binomial(vec![1], 1)],
        );
        assert_eq!(term_eval(&t, &[q(1, 2)], &[2]).unwrap(), q(1, 2));
    }

    #[test]
    fn two_variable_value() {
        let t = GFTerm::new(
            ParamPoly::one(0),
            vec![RatAffine::zero(), RatAffine::zero()],
            vec![FactorAtom::binomial(vec![1, 1], 1), FactorAtom::binomial(vec![0, 1], 1)],
        );
        assert_eq!(term_eval(&t, &[q(1, 2), q(1, 3)], &[]).unwrap(), q(9, 5));
    }

    #[test]
    fn vanishing_denominator_is_reported() {
        let t = one_var_term(0, vec![FactorAtom::binomial(vec![2], 1)]);
        assert_eq!(term_eval(&t, &[qi(-1)], &[]), Err(Error::VanishingDenominator));
    }

    #[test]
    fn canonicalize_merges_like_terms() {
        let t = one_var_term(1, vec![FactorAtom::binomial(vec![1], 1), FactorAtom::binomial(vec![1], 2)]);
        assert_eq!(t.denominator, vec![FactorAtom::binomial(vec![1], 3)]);
        let mut neg = t.clone();
        neg.coefficient = neg.coefficient.neg();
        let e = GFExpression::new(vec![t.clone(), neg, t.clone()]).canonicalize();
        assert_eq!(e.terms, vec![t]);
    }
}
