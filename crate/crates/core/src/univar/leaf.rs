use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::denumerant::Denumerant;
use crate::arith::{GFExpression, ParamPoly, RatAffine};
use crate::engine::constraint::{CaseConstraint, ConstraintSet};
use crate::engine::eliminate::{active_vars, GuardedTerm};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::quasipoly::QuasiPolynomial;

/// `[guards(b)] * coef(b) * D_alpha(arg(b))`: one summand of the final
/// constant term.
#[derive(Clone, Debug)]
pub struct FinalTerm {
    pub guards: ConstraintSet,
    pub coef: ParamPoly,
    pub arg: RatAffine,
    pub denumerant: Arc<Denumerant>,
}

impl FinalTerm {
    /// Value ignoring the guards.
    pub fn eval(&self, b: &[i64]) -> Result<BigRational> {
        let c = self.coef.eval(b);
        if c.is_zero() {
            return Ok(c);
        }
        let n = self.arg.eval_int(b)?;
        Ok(c * BigRational::from_integer(self.denumerant.eval(n)))
    }

    pub fn value(&self, b: &[i64]) -> Result<BigRational> {
        if self.guards.holds(b)? {
            self.eval(b)
        } else {
            Ok(BigRational::zero())
        }
    }

    /// Degree bound of the summand as a quasi-polynomial.
    pub fn degree_bound(&self) -> u32 {
        self.coef.degree().unwrap_or(0) + self.denumerant.degree_bound()
    }
}

/// Period of `b -> [congruences] * D(arg(b))` in each parameter.
pub fn summand_period<'a>(
    congruences: impl Iterator<Item = &'a CaseConstraint>,
    arg: &RatAffine,
    denumerant: &Denumerant,
    nparams: usize,
) -> Vec<u64> {
    let mut period = vec![1u64; nparams];
    for c in congruences {
        if let crate::engine::constraint::ConstraintKind::Congruence { modulus, .. } = c.kind {
            for &(i, k) in c.form.coeffs() {
                let m = modulus as u64;
                period[i] = period[i].lcm(&(m / m.gcd(&k.unsigned_abs())));
            }
        }
    }
    if denumerant.parts() > 0 {
        let l = denumerant.period() * arg.denominator() as u64;
        for &(i, k) in arg.numerator().coeffs() {
            period[i] = period[i].lcm(&(l / l.gcd(&k.unsigned_abs())));
        }
    }
    period
}

/// Memo of denumerants by part multiset.
#[derive(Default)]
pub struct DenumerantCache {
    map: HashMap<Vec<(u64, u32)>, Arc<Denumerant>>,
}

impl DenumerantCache {
    pub fn get(&mut self, alphas: &[(u64, u32)]) -> Result<Arc<Denumerant>> {
        if let Some(d) = self.map.get(alphas) {
            return Ok(d.clone());
        }
        let d = Arc::new(Denumerant::new(alphas)?);
        self.map.insert(alphas.to_vec(), d.clone());
        Ok(d)
    }
}

struct Prepared {
    guards: ConstraintSet,
    coef: ParamPoly,
    arg: RatAffine,
    alphas: Vec<(u64, u32)>,
}

fn prepare(t: &GuardedTerm) -> Result<Option<Prepared>> {
    let z = final_var(&t.term)?;
    let mut coef = t.term.coefficient.clone();
    let mut e = t.term.exponents[z].clone();
    let mut acc: BTreeMap<u64, u32> = BTreeMap::new();
    for f in &t.term.denominator {
        let a = f.vector[z];
        if a < 0 {
            // 1/(1 - z^{-a}) = -z^a / (1 - z^a)
            if f.multiplicity % 2 == 1 {
                coef = coef.neg();
            }
            e = e.add_int(-a * f.multiplicity as i64);
        }
        *acc.entry(a.unsigned_abs()).or_insert(0) += f.multiplicity;
    }
    let alphas: Vec<(u64, u32)> = acc.into_iter().collect();
    let dsum: i64 = alphas.iter().map(|&(a, m)| a as i64 * m as i64).sum();
    if alphas.is_empty() {
        if !e.is_constant() {
            return Err(Error::UnsupportedEquality(z));
        }
        if e.as_integer() != Some(0) {
            return Ok(None);
        }
        return Ok(Some(Prepared { guards: t.guards.clone(), coef, arg: RatAffine::zero(), alphas }));
    }
    // e <= D - 1 is exactly the window where D_alpha(-e) is the constant term
    let guards = if e.is_constant() {
        if e.constant_value() > BigRational::from_integer((dsum - 1).into()) {
            return Ok(None);
        }
        t.guards.clone()
    } else {
        let f = e.numerator().scale(-1).shift((dsum - 1) * e.denominator());
        match t.guards.with(CaseConstraint::ge0(f)) {
            Some(g) => g,
            None => return Ok(None),
        }
    };
    Ok(Some(Prepared { guards, coef, arg: e.neg(), alphas }))
}

/// The single variable a term still involves (0 for a constant term).
pub fn final_var(term: &crate::arith::GFTerm) -> Result<usize> {
    match active_vars(term).as_slice() {
        [] => Ok(0),
        [z] => Ok(*z),
        [_, y, ..] => Err(Error::NotExpandable(format!("z{} left after elimination", y + 1))),
    }
}

/// Converts the one-variable guarded terms left after elimination into
/// denumerant summands, merging equal summands.
pub fn final_terms(terms: &[GuardedTerm], cache: &mut DenumerantCache, mode: Parallelism) -> Result<Vec<FinalTerm>> {
    let prepared = par::try_map(mode, terms, prepare)?;
    let mut acc: BTreeMap<(ConstraintSet, RatAffine, Vec<(u64, u32)>), ParamPoly> = BTreeMap::new();
    for p in prepared.into_iter().flatten() {
        match acc.get_mut(&(p.guards.clone(), p.arg.clone(), p.alphas.clone())) {
            Some(c) => c.add_assign(&p.coef),
            None => {
                acc.insert((p.guards, p.arg, p.alphas), p.coef);
            }
        }
    }
    let mut out = Vec::with_capacity(acc.len());
    for ((guards, arg, alphas), coef) in acc {
        if coef.is_zero() {
            continue;
        }
        out.push(FinalTerm { guards, coef, arg, denumerant: cache.get(&alphas)? });
    }
    Ok(out)
}

/// Checks the final step against direct series coefficients.
pub struct FinalVerifier {
    pub samples: usize,
    pub seed: u64,
    pub param_range: (i64, i64),
}

impl FinalVerifier {
    pub fn verify(&self, source: &[GuardedTerm], out: &[FinalTerm], nparams: usize) -> Result<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_f1a1);
        for _ in 0..self.samples {
            let b: Vec<i64> = (0..nparams).map(|_| rng.random_range(self.param_range.0..=self.param_range.1)).collect();
            let mut lhs = BigRational::zero();
            for t in source {
                if !t.guards.holds(&b)? {
                    continue;
                }
                let z = final_var(&t.term)?;
                let mut c = t.term.coefficient.eval(&b);
                let mut e = t.term.exponents[z].eval_int(&b)?;
                let mut alphas = Vec::new();
                for f in &t.term.denominator {
                    let a = f.vector[z];
                    if a < 0 {
                        if f.multiplicity % 2 == 1 {
                            c = -c;
                        }
                        e -= a * f.multiplicity as i64;
                    }
                    alphas.push((a.unsigned_abs(), f.multiplicity));
                }
                lhs += c * BigRational::from_integer(crate::engine::verify::plain_series_coefficient(&alphas, -e));
            }
            let mut rhs = BigRational::zero();
            for t in out {
                rhs += t.value(&b)?;
            }
            if lhs != rhs {
                return Err(Error::Resummation {
                    stage: "final step".into(),
                    detail: format!("final constant term {lhs} but denumerant summands give {rhs} at b = {b:?}"),
                });
            }
        }
        Ok(self.samples)
    }
}

/// Constant term of a one-variable expression under a context, as a list
/// of (sign constraints, quasi-polynomial) leaves with additive semantics:
/// at `b` the constant term is the sum of the leaves whose constraints hold.
pub fn const_term_leaf(
    expr: &GFExpression,
    constraints: &ConstraintSet,
    params: &[String],
) -> Result<Vec<(ConstraintSet, QuasiPolynomial)>> {
    let guarded: Vec<GuardedTerm> =
        expr.terms.iter().map(|t| GuardedTerm { guards: constraints.clone(), term: t.clone() }).collect();
    let mut cache = DenumerantCache::default();
    let fts = final_terms(&guarded, &mut cache, Parallelism::Sequential)?;
    let mut groups: BTreeMap<ConstraintSet, Vec<&FinalTerm>> = BTreeMap::new();
    for t in &fts {
        let signs = ConstraintSet::from_constraints(t.guards.signs().cloned()).expect("canonical signs");
        groups.entry(signs).or_default().push(t);
    }
    let n = params.len();
    let mut out = Vec::new();
    for (signs, ts) in groups {
        let mut period = vec![1u64; n];
        let mut degree = 0;
        for t in &ts {
            let p = summand_period(t.guards.congruences(), &t.arg, &t.denumerant, n);
            for (a, b) in period.iter_mut().zip(p) {
                *a = a.lcm(&b);
            }
            degree = degree.max(t.degree_bound());
        }
        let qp = QuasiPolynomial::fit(params.to_vec(), period, degree, Parallelism::Sequential, |b| {
            let mut s = BigRational::zero();
            for t in &ts {
                if ConstraintSet::from_constraints(t.guards.congruences().cloned()).expect("canonical").holds(b)? {
                    s += t.eval(b)?;
                }
            }
            Ok(s)
        })?;
        out.push((signs, qp));
    }
    Ok(out)
}
