use std::collections::BTreeMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{partition_counts, ParamPoly};
use crate::error::{Error, Result};
use crate::quasipoly::QuasiPolynomial;

/// Largest `lcm * (multiplicity + 1)` for which a dense table is built.
const DENSE_SAMPLE_LIMIT: u64 = 4096;

/// Exact fit of a one-variable quasi-polynomial (parameter `n`) through
/// samples, with every surplus sample checked.
pub fn qp_from_samples(samples: &BTreeMap<i64, BigRational>, degree: u32, period: u64) -> Result<QuasiPolynomial> {
    if period == 0 {
        return Err(Error::Interpolation("period must be positive".into()));
    }
    let mut table = BTreeMap::new();
    for r in 0..period {
        let pts: Vec<(i64, &BigRational)> =
            samples.iter().filter(|(&n, _)| n.mod_floor(&(period as i64)) as u64 == r).map(|(&n, v)| (n, v)).collect();
        let need = degree as usize + 1;
        if pts.len() < need {
            return Err(Error::Interpolation(format!(
                "residue {r} mod {period} has {} samples, need {need}",
                pts.len()
            )));
        }
        let poly = newton_fit(&pts[..need]);
        for &(n, v) in &pts[need..] {
            if &poly.eval(&[n]) != v {
                return Err(Error::Interpolation(format!(
                    "sample at n = {n} disagrees with the degree {degree}, period {period} fit"
                )));
            }
        }
        if !poly.is_zero() {
            table.insert(vec![r], poly);
        }
    }
    Ok(QuasiPolynomial::from_table(vec!["n".into()], vec![period], table)?.minimize())
}

/// Newton divided differences through arbitrary distinct nodes.
fn newton_fit(pts: &[(i64, &BigRational)]) -> ParamPoly {
    let k = pts.len();
    let xs: Vec<BigRational> = pts.iter().map(|&(n, _)| BigRational::from_integer(n.into())).collect();
    let mut dd: Vec<BigRational> = pts.iter().map(|&(_, v)| v.clone()).collect();
    for level in 1..k {
        for i in (level..k).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    let mut poly = ParamPoly::zero(1);
    let mut basis = ParamPoly::one(1);
    for i in 0..k {
        poly.add_assign(&basis.scale(&dd[i]));
        let lin = ParamPoly::var(1, 0).sub(&ParamPoly::constant(1, xs[i].clone()));
        basis = basis.mul(&lin);
    }
    poly
}

/// Quasi-polynomial part and finite correction of the coefficients of
/// `numerator(z) / prod (1 - z^{a_k})^{mu_k}`.
///
/// `numerator[i]` is the coefficient of `z^i`. For every `n >= 0` the
/// series coefficient equals `qp(n) + correction[n]` (missing entries are
/// zero); corrections live only below the degree of the polynomial part.
pub fn denumerant_qp(
    factors: &[(u64, u32)],
    numerator: &[BigRational],
) -> Result<(QuasiPolynomial, BTreeMap<i64, BigRational>)> {
    if factors.iter().any(|&(a, m)| a == 0 || m == 0) {
        return Err(Error::Malformed("factor values and multiplicities must be positive".into()));
    }
    let dsum: i64 = factors.iter().map(|&(a, m)| a as i64 * m as i64).sum();
    let total: u32 = factors.iter().map(|&(_, m)| m).sum();
    let l = factors.iter().fold(1u64, |acc, &(a, _)| acc.lcm(&a));
    let num_deg = numerator.iter().rposition(|c| !c.is_zero()).map(|d| d as i64).unwrap_or(-1);
    let n0 = (num_deg - dsum + 1).max(0);
    let len = (n0 as u64 + l * (total as u64 + 1)) as usize;
    let denom = partition_counts(factors, len);
    let coeff = |n: usize| -> BigRational {
        let mut s = BigRational::zero();
        for (i, c) in numerator.iter().enumerate().take(n + 1) {
            if !c.is_zero() {
                s += c * BigRational::from_integer(denom[n - i].clone());
            }
        }
        s
    };
    if total == 0 {
        let corr = (0..numerator.len()).map(|n| (n as i64, coeff(n))).filter(|(_, v)| !v.is_zero()).collect();
        return Ok((QuasiPolynomial::zero(vec!["n".into()]), corr));
    }
    let samples: BTreeMap<i64, BigRational> = (n0 as usize..len).map(|n| (n as i64, coeff(n))).collect();
    let qp = qp_from_samples(&samples, total - 1, l)?;
    let mut corr = BTreeMap::new();
    for n in 0..n0 {
        let d = coeff(n as usize) - qp.eval(&[n])?;
        if !d.is_zero() {
            corr.insert(n, d);
        }
    }
    Ok((qp, corr))
}

/// The quasi-polynomial `D(n)` agreeing with the number of partitions of
/// `n >= 0` into parts `alpha` (part `alpha_k` in `mu_k` colours), continued
/// to all integers.
///
/// With a small period the dense quasi-polynomial is tabulated. Otherwise
/// values come from a memoized power series plus the continuation
/// `D(n) = 0` for `-sum(alpha) < n < 0` and
/// `D(n) = (-1)^{F-1} D(-n - sum(alpha))` below, `F` the number of parts.
#[derive(Debug)]
pub struct Denumerant {
    alphas: Vec<(u64, u32)>,
    sum_alpha: i64,
    parts: u32,
    period: u64,
    dense: Option<QuasiPolynomial>,
    series: RwLock<Vec<BigInt>>,
}

impl PartialEq for Denumerant {
    fn eq(&self, other: &Self) -> bool {
        self.alphas == other.alphas
    }
}

impl Eq for Denumerant {}

impl Denumerant {
    pub fn new(alphas: &[(u64, u32)]) -> Result<Self> {
        let mut acc: BTreeMap<u64, u32> = BTreeMap::new();
        for &(a, m) in alphas {
            if a == 0 {
                return Err(Error::Malformed("zero part in a denumerant".into()));
            }
            if m > 0 {
                *acc.entry(a).or_insert(0) += m;
            }
        }
        let alphas: Vec<(u64, u32)> = acc.into_iter().collect();
        let sum_alpha = alphas.iter().map(|&(a, m)| a as i64 * m as i64).sum();
        let parts = alphas.iter().map(|&(_, m)| m).sum();
        let period = alphas.iter().fold(1u64, |acc, &(a, _)| acc.lcm(&a));
        let dense = if parts > 0 && period.saturating_mul(parts as u64 + 1) <= DENSE_SAMPLE_LIMIT {
            Some(denumerant_qp(&alphas, &[BigRational::one()])?.0)
        } else {
            None
        };
        Ok(Denumerant { alphas, sum_alpha, parts, period, dense, series: RwLock::new(vec![BigInt::one()]) })
    }

    pub fn alphas(&self) -> &[(u64, u32)] {
        &self.alphas
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Number of parts counted with multiplicity.
    pub fn parts(&self) -> u32 {
        self.parts
    }

    pub fn sum_alpha(&self) -> i64 {
        self.sum_alpha
    }

    /// Degree bound `parts - 1` (0 for the empty product).
    pub fn degree_bound(&self) -> u32 {
        self.parts.saturating_sub(1)
    }

    pub fn dense(&self) -> Option<&QuasiPolynomial> {
        self.dense.as_ref()
    }

    /// Series coefficient for `n >= 0`.
    pub fn count(&self, n: u64) -> BigInt {
        let n = n as usize;
        {
            let s = self.series.read().expect("series lock");
            if n < s.len() {
                return s[n].clone();
            }
        }
        let mut s = self.series.write().expect("series lock");
        if n >= s.len() {
            let len = (n + 1).max(2 * s.len());
            *s = partition_counts(&self.alphas, len - 1);
        }
        s[n].clone()
    }

    pub fn eval(&self, n: i64) -> BigInt {
        if self.parts == 0 {
            return if n == 0 { BigInt::one() } else { BigInt::zero() };
        }
        if let Some(q) = &self.dense {
            return q.eval(&[n]).expect("one parameter").to_integer();
        }
        self.eval_series(n)
    }

    /// Evaluation through the series and the reciprocity continuation only.
    pub fn eval_series(&self, n: i64) -> BigInt {
        if self.parts == 0 {
            return if n == 0 { BigInt::one() } else { BigInt::zero() };
        }
        if n >= 0 {
            self.count(n as u64)
        } else if n > -self.sum_alpha {
            BigInt::zero()
        } else {
            let v = self.count((-n - self.sum_alpha) as u64);
            if self.parts % 2 == 1 {
                v
            } else {
                -v
            }
        }
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .alphas
            .iter()
            .map(|&(a, m)| if m == 1 { a.to_string() } else { format!("{a}^{m}") })
            .collect();
        format!("D[{}]", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::qi;
    use crate::arith::series_coefficient;

    #[test]
    fn parts_one_and_two() {
        let (qp, corr) = denumerant_qp(&[(1, 1), (2, 1)], &[qi(1)]).unwrap();
        assert!(corr.is_empty());
        assert_eq!(qp.period(), &[2]);
        for n in 0..50 {
            assert_eq!(qp.eval(&[n]).unwrap(), qi(n / 2 + 1));
        }
        assert_eq!(qp.eval(&[4]).unwrap(), qi(3));
    }

    #[test]
    fn three_ones_is_binomial() {
        let (qp, _) = denumerant_qp(&[(1, 3)], &[qi(1)]).unwrap();
        assert!(qp.is_polynomial());
        for n in 0..20 {
            assert_eq!(qp.eval(&[n]).unwrap(), qi((n + 2) * (n + 1) / 2));
        }
    }

    #[test]
    fn improper_numerator_has_corrections() {
        let (qp, corr) = denumerant_qp(&[(1, 1)], &[qi(0), qi(0), qi(0), qi(1)]).unwrap();
        assert_eq!(qp.eval(&[7]).unwrap(), qi(1));
        assert_eq!(corr, BTreeMap::from([(0, qi(-1)), (1, qi(-1)), (2, qi(-1))]));
    }

    #[test]
    fn fits_from_samples() {
        let s: BTreeMap<i64, BigRational> = [(0, 1), (1, 1), (2, 2), (3, 2), (4, 3), (5, 3)].iter().map(|&(n, v)| (n, qi(v))).collect();
        let q = qp_from_samples(&s, 1, 2).unwrap();
        for n in 0..10 {
            assert_eq!(q.eval(&[n]).unwrap(), qi(n / 2 + 1));
        }
        let s: BTreeMap<i64, BigRational> = [(0, 0), (1, 1), (2, 4), (3, 9)].iter().map(|&(n, v)| (n, qi(v))).collect();
        let q = qp_from_samples(&s, 2, 1).unwrap();
        assert_eq!(q.eval(&[11]).unwrap(), qi(121));
        let s: BTreeMap<i64, BigRational> = [(0, 1), (1, 1)].iter().map(|&(n, v)| (n, qi(v))).collect();
        assert_eq!(qp_from_samples(&s, 0, 1).unwrap().eval(&[5]).unwrap(), qi(1));
        let bad: BTreeMap<i64, BigRational> = [(0, 0), (1, 1), (2, 4)].iter().map(|&(n, v)| (n, qi(v))).collect();
        assert!(matches!(qp_from_samples(&bad, 1, 1), Err(Error::Interpolation(_))));
    }

    #[test]
    fn dense_and_series_routes_agree() {
        for alphas in [vec![(1, 1), (2, 1)], vec![(2, 2), (3, 1)], vec![(1, 2), (4, 1), (6, 1)], vec![(5, 1)]] {
            let d = Denumerant::new(&alphas).unwrap();
            assert!(d.dense().is_some());
            for n in -40..40 {
                assert_eq!(d.eval(n), d.eval_series(n), "{alphas:?} at {n}");
            }
        }
    }

    #[test]
    fn agrees_with_series_coefficient() {
        use crate::arith::{FactorAtom, GFExpression, GFTerm, RatAffine};
        let e = GFExpression::new(vec![GFTerm::new(
            ParamPoly::one(0),
            vec![RatAffine::zero()],
            vec![FactorAtom::binomial(vec![2], 1), FactorAtom::binomial(vec![3], 2)],
        )]);
        let d = Denumerant::new(&[(2, 1), (3, 2)]).unwrap();
        for n in 0..30 {
            assert_eq!(BigRational::from_integer(d.eval(n)), series_coefficient(&e, 0, n).unwrap());
        }
    }
}
