use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::constraint::{CaseConstraint, ConstraintSet};
use crate::arith::{FactorAtom, FactorKind, GFTerm, ParamPoly, RatAffine};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};

/// A term that contributes only where all its guards hold.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuardedTerm {
    pub guards: ConstraintSet,
    pub term: GFTerm,
}

/// The x-normalized, parallel-merged form of one term: a sum of monomial
/// numerators over a common denominator `keep * prod poles`, where every
/// pole vector has positive x-component and no two poles are parallel.
pub(crate) struct Normalized {
    pub pieces: Vec<(ParamPoly, Vec<RatAffine>)>,
    pub keep: Vec<FactorAtom>,
    pub poles: Vec<(Vec<i64>, u32)>,
}

pub(crate) fn normalize(term: &GFTerm, x: usize) -> Result<Normalized> {
    let mut coef = term.coefficient.clone();
    let mut exps = term.exponents.clone();
    let mut keep = Vec::new();
    let mut xf: Vec<(Vec<i64>, u32)> = Vec::new();
    for f in &term.denominator {
        if f.kind != FactorKind::Binomial {
            return Err(Error::NotExpandable(format!("unexpected factor {f} in the engine")));
        }
        if f.vector[x] == 0 {
            keep.push(f.clone());
            continue;
        }
        let mut v = f.vector.clone();
        if v[x] < 0 {
            // 1/(1 - z^v)^mu = (-1)^mu z^{-mu v} / (1 - z^{-v})^mu
            if f.multiplicity % 2 == 1 {
                coef = coef.neg();
            }
            for (e, &vj) in exps.iter_mut().zip(&v) {
                if vj != 0 {
                    *e = e.add_int(checked_mul(-(f.multiplicity as i64), vj)?);
                }
            }
            v.iter_mut().for_each(|c| *c = -*c);
        }
        xf.push((v, f.multiplicity));
    }

    let mut classes: BTreeMap<Vec<i64>, Vec<(i64, u32)>> = BTreeMap::new();
    for (v, mu) in xf {
        let g = v.iter().fold(0i64, |acc, &c| acc.gcd(&c));
        let p: Vec<i64> = v.iter().map(|&c| c / g).collect();
        classes.entry(p).or_default().push((g, mu));
    }
    let mut pieces = vec![(coef, exps)];
    let mut poles = Vec::new();
    for (p, lst) in classes {
        let l = lst.iter().fold(1i64, |acc, &(g, _)| acc.lcm(&g));
        // 1/(1 - y^g) = GeomSum(y^g, l/g) / (1 - y^l), expanded into monomials
        let mut num: BTreeMap<i64, i64> = BTreeMap::from([(0, 1)]);
        for &(g, mu) in &lst {
            if g == l {
                continue;
            }
            for _ in 0..mu {
                let mut nn: BTreeMap<i64, i64> = BTreeMap::new();
                for (&k, &c) in &num {
                    for t in 0..l / g {
                        *nn.entry(k + g * t).or_insert(0) += c;
                    }
                }
                num = nn;
            }
        }
        if num.len() > 1 {
            let mut next = Vec::with_capacity(pieces.len() * num.len());
            for (cf, ex) in &pieces {
                for (&k, &c) in &num {
                    let shifted: Vec<RatAffine> =
                        ex.iter().zip(&p).map(|(e, &pj)| if pj == 0 { e.clone() } else { e.add_int(k * pj) }).collect();
                    next.push((cf.scale(&BigRational::from_integer(c.into())), shifted));
                }
            }
            pieces = next;
        }
        let mu: u32 = lst.iter().map(|&(_, mu)| mu).sum();
        poles.push((p.iter().map(|&c| c * l).collect(), mu));
    }
    Ok(Normalized { pieces, keep, poles })
}

fn checked_mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// `sum_r C(mk+r-1, r) [Y^j] g^r` for `g = (1-Y)^p - 1`, truncated below
/// `Y^mu`: the expansion of `(1 - U (1-Y)^p)^{-mk}` in powers of `Y` and
/// `U/(1-U)`. Entries are `(j, r, coefficient)`.
fn factor_expansion(p: i64, mk: u32, mu: usize) -> Vec<(usize, u32, BigInt)> {
    let mut gpoly = vec![BigInt::zero(); mu];
    for (l, g) in gpoly.iter_mut().enumerate().skip(1) {
        let c = binomial_int(&BigInt::from(p), l as u32);
        *g = if l % 2 == 1 { -c } else { c };
    }
    let mut res = Vec::new();
    let mut gr = vec![BigInt::zero(); mu];
    gr[0] = BigInt::one();
    for r in 0..mu as u32 {
        let mult = binomial_int(&BigInt::from(mk + r - 1), r);
        for (j, c) in gr.iter().enumerate() {
            if !c.is_zero() {
                res.push((j, r, &mult * c));
            }
        }
        let mut ng = vec![BigInt::zero(); mu];
        for (i1, a) in gr.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (i2, b) in gpoly.iter().enumerate().take(mu - i1) {
                ng[i1 + i2] += a * b;
            }
        }
        gr = ng;
    }
    res
}

pub(crate) fn binomial_int(n: &BigInt, k: u32) -> BigInt {
    if n.is_negative() {
        // only used with n >= 0 or n = -1 (mk + r - 1 with mk >= 1 never is)
        unreachable!("negative binomial argument");
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Constant term in `x` of one guarded term, as a list of guarded terms free
/// of `x`.
pub fn eliminate_term(gt: &GuardedTerm, x: usize) -> Result<Vec<GuardedTerm>> {
    let nparams = gt.term.coefficient.nvars();
    let nv = gt.term.exponents.len();
    let norm = normalize(&gt.term, x)?;
    let mut out = Vec::new();
    for (cf, ex) in &norm.pieces {
        let e = &ex[x];
        if norm.poles.is_empty() {
            // no pole in x: constant term of x^e is [e == 0]
            if e.is_constant() {
                if e.as_integer() == Some(0) {
                    let mut t = gt.term.clone();
                    t.coefficient = cf.clone();
                    t.exponents = ex.clone();
                    t.denominator = norm.keep.clone();
                    out.push(GuardedTerm { guards: gt.guards.clone(), term: t });
                }
                continue;
            }
            return Err(Error::UnsupportedEquality(x));
        }
        let dsum: i64 = norm.poles.iter().map(|(v, mu)| v[x] * *mu as i64).sum();
        // guard e <= D - 1, i.e. (D-1) den - num >= 0
        let g2 = if e.is_constant() {
            if e.constant_value() > BigRational::from_integer((dsum - 1).into()) {
                continue;
            }
            gt.guards.clone()
        } else {
            let f = e.numerator().scale(-1).shift((dsum - 1) * e.denominator());
            match gt.guards.with(CaseConstraint::ge0(f)) {
                Some(g) => g,
                None => continue,
            }
        };
        for (i, (vi, mu)) in norm.poles.iter().enumerate() {
            let a = vi[x];
            let mu = *mu as usize;
            let others: Vec<&(Vec<i64>, u32)> =
                norm.poles.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, f)| f).collect();
            let betas: Vec<(Vec<i64>, u32, i64)> = others
                .iter()
                .map(|(vk, mk)| {
                    let ak = vk[x];
                    let gk = a.gcd(&ak);
                    let beta: Vec<i64> =
                        (0..nv).map(|j| if j == x { 0 } else { (a * vk[j] - ak * vi[j]) / gk }).collect();
                    (beta, *mk, ak / gk)
                })
                .collect();
            let fexps: Vec<Vec<(usize, u32, BigInt)>> =
                betas.iter().map(|(_, mk, pk)| factor_expansion(*pk, *mk, mu)).collect();
            // x^a section of prod_k GS(x^{a_k} W_k, a/g_k)^{m_k}, indexed by x-exponent
            let mut base_sec: BTreeMap<(i64, Vec<i64>), BigInt> = BTreeMap::from([((0, vec![0; nv]), BigInt::one())]);
            for (vk, mk) in &others {
                let ak = vk[x];
                let nk = a / a.gcd(&ak);
                for _ in 0..*mk {
                    let mut ns: BTreeMap<(i64, Vec<i64>), BigInt> = BTreeMap::new();
                    for ((xe, we), c) in &base_sec {
                        for t in 0..nk {
                            let w2: Vec<i64> = (0..nv).map(|j| if j == x { 0 } else { we[j] + t * vk[j] }).collect();
                            *ns.entry((xe + ak * t, w2)).or_insert_with(BigInt::zero) += c;
                        }
                    }
                    base_sec = ns;
                }
            }
            for s in 0..a {
                let g3 = if e.is_constant() {
                    let v = e.constant_value();
                    if !v.is_integer() || (v.to_integer() - BigInt::from(s)).mod_floor(&BigInt::from(a)) != BigInt::zero() {
                        continue;
                    }
                    g2.clone()
                } else {
                    let den = e.denominator();
                    match g2.with(CaseConstraint::congruence(e.numerator().clone(), a * den, s * den)) {
                        Some(g) => g,
                        None => continue,
                    }
                };
                let q = e.add_int(-s).div_int(a);
                // monomials x^s * section with x-exponent divisible by a
                let sec: Vec<(i64, &Vec<i64>, &BigInt)> = base_sec
                    .iter()
                    .filter(|((xe, _), c)| (xe + s) % a == 0 && !c.is_zero())
                    .map(|((xe, we), c)| ((xe + s) / a, we, c))
                    .collect();
                let acoef: Vec<ParamPoly> = (0..mu)
                    .map(|j| {
                        let b = ParamPoly::binomial(nparams, &q, j as u32);
                        if j % 2 == 1 {
                            b.neg()
                        } else {
                            b
                        }
                    })
                    .collect();
                let qshift: Vec<RatAffine> =
                    (0..nv).map(|j| if j == x || vi[j] == 0 { RatAffine::zero() } else { q.scale_int(-vi[j]) }).collect();
                for (ja, ac) in acoef.iter().enumerate() {
                    let base_coef = cf.mul(ac);
                    if base_coef.is_zero() {
                        continue;
                    }
                    for &(h, we, c) in &sec {
                        for jb in 0..mu - ja {
                            let mut cb = c * binomial_int(&BigInt::from(h), jb as u32);
                            if cb.is_zero() {
                                continue;
                            }
                            if jb % 2 == 1 {
                                cb = -cb;
                            }
                            let budget = mu - 1 - ja - jb;
                            let mut choice = Vec::with_capacity(fexps.len());
                            enumerate_combos(&fexps, budget, &mut choice, &mut |combo| {
                                let mut cc = cb.clone();
                                let mut den = norm.keep.clone();
                                let mut shift = vec![0i64; nv];
                                for (&(_, r, ref c2), (beta, mk, _)) in combo.iter().zip(&betas) {
                                    cc *= c2;
                                    den.push(FactorAtom::binomial(beta.clone(), mk + r));
                                    for j in 0..nv {
                                        shift[j] += *r as i64 * beta[j];
                                    }
                                }
                                if cc.is_zero() {
                                    return;
                                }
                                let coef = base_coef.scale(&BigRational::from_integer(cc));
                                let exps: Vec<RatAffine> = (0..nv)
                                    .map(|j| {
                                        if j == x {
                                            return RatAffine::zero();
                                        }
                                        ex[j].add(&qshift[j]).add_int(-h * vi[j] + we[j] + shift[j])
                                    })
                                    .collect();
                                out.push(GuardedTerm { guards: g3.clone(), term: GFTerm::new(coef, exps, den) });
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn enumerate_combos<'a>(
    fexps: &'a [Vec<(usize, u32, BigInt)>],
    budget: usize,
    choice: &mut Vec<&'a (usize, u32, BigInt)>,
    f: &mut dyn FnMut(&[&'a (usize, u32, BigInt)]),
) {
    let k = choice.len();
    if k == fexps.len() {
        f(choice);
        return;
    }
    for item in &fexps[k] {
        if item.0 <= budget {
            choice.push(item);
            enumerate_combos(fexps, budget - item.0, choice, f);
            choice.pop();
        }
    }
}

/// Merges terms with identical guards, exponents and denominators.
pub fn merge_terms(terms: Vec<GuardedTerm>) -> Vec<GuardedTerm> {
    let mut acc: BTreeMap<(ConstraintSet, Vec<RatAffine>, Vec<FactorAtom>), ParamPoly> = BTreeMap::new();
    for t in terms {
        let key = (t.guards, t.term.exponents, t.term.denominator);
        match acc.get_mut(&key) {
            Some(c) => c.add_assign(&t.term.coefficient),
            None => {
                acc.insert(key, t.term.coefficient);
            }
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((guards, exponents, denominator), coefficient)| GuardedTerm {
            guards,
            term: GFTerm { coefficient, exponents, denominator },
        })
        .collect()
}

/// One elimination stage over a whole guarded sum.
pub fn eliminate_guarded(terms: &[GuardedTerm], x: usize, mode: Parallelism) -> Result<Vec<GuardedTerm>> {
    let parts = par::try_map(mode, terms, |t| eliminate_term(t, x))?;
    Ok(merge_terms(parts.into_iter().flatten().collect()))
}

/// Variables a term still depends on.
pub fn active_vars(term: &GFTerm) -> Vec<usize> {
    (0..term.exponents.len())
        .filter(|&i| !term.exponents[i].is_zero() || term.denominator.iter().any(|f| f.vector[i] != 0))
        .collect()
}

/// Predicted number of guarded terms produced by eliminating `x` from one
/// term: each pole contributes `mu` times the size of its section, the
/// product of the conjugation lengths of the other poles.
pub fn section_cost(term: &GFTerm, x: usize) -> Result<u128> {
    let norm = normalize(term, x)?;
    let mut per_piece: u128 = 0;
    for (i, (vi, mu)) in norm.poles.iter().enumerate() {
        let a = vi[x];
        let mut size: u128 = *mu as u128;
        for (k, (vk, mk)) in norm.poles.iter().enumerate() {
            if k != i {
                let l = (a / a.gcd(&vk[x])) as u128;
                size = size.saturating_mul(l.saturating_pow(*mk));
            }
        }
        per_piece = per_piece.saturating_add(size);
    }
    Ok(per_piece.max(1).saturating_mul(norm.pieces.len() as u128))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_expansion_matches_series() {
        // (1 - U(1-Y)^2)^{-1}: coefficient of Y^1 is sum_r ... ; compare with
        // direct expansion at U = 1/3.
        let fx = factor_expansion(2, 1, 3);
        let u = BigRational::new(1.into(), 3.into());
        let w = &u / (BigRational::one() - &u);
        let mut coeffs = vec![BigRational::zero(); 3];
        for (j, r, c) in fx {
            let mut t = BigRational::from_integer(c);
            for _ in 0..r {
                t *= &w;
            }
            coeffs[j] += t / (BigRational::one() - &u);
        }
        // direct: 1/(1 - U + 2UY - UY^2) at U = 1/3 -> 1/(2/3 + 2Y/3 - Y^2/3)
        // = 3/2 * 1/(1 + Y - Y^2/2) = 3/2 (1 - Y + (3/2) Y^2 + ...)
        assert_eq!(coeffs[0], BigRational::new(3.into(), 2.into()));
        assert_eq!(coeffs[1], BigRational::new((-3).into(), 2.into()));
        assert_eq!(coeffs[2], BigRational::new(9.into(), 4.into()));
    }
}
