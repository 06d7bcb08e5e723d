//! Exact self-checks for elimination stages.
//!
//! A stage replaces a guarded sum by the constant terms of its members in
//! one variable `x`. For random integer parameters `b` and random rational
//! values `W` of the other variables, the constant term of each source term
//! is a finite series coefficient (x is the smallest variable of the
//! iterated Laurent field, so every factor expands as a power series in x).
//! The check compares that number with the exact value of the stage output
//! at `W`. The x-normalization (sign flips and lcm-lifting of parallel
//! factors) is checked separately as a rational-function identity at a
//! random point that includes `x`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::eliminate::{normalize, GuardedTerm};
use crate::arith::factor::rational_pow;
use crate::arith::series::weighted_inverse_series;
use crate::arith::{FactorAtom, GFTerm};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};

const PRIMES: [i64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

/// Exact values of monomials and factors at one rational point, memoized.
pub(crate) struct PointCache {
    z: Vec<BigRational>,
    pows: HashMap<(usize, i64), BigRational>,
    factors: HashMap<Vec<i64>, BigRational>,
}

impl PointCache {
    pub fn new(z: Vec<BigRational>) -> Self {
        PointCache { z, pows: HashMap::new(), factors: HashMap::new() }
    }

    pub fn pow(&mut self, i: usize, e: i64) -> Result<BigRational> {
        if e == 0 {
            return Ok(BigRational::one());
        }
        if let Some(v) = self.pows.get(&(i, e)) {
            return Ok(v.clone());
        }
        let v = rational_pow(&self.z[i], e)?;
        self.pows.insert((i, e), v.clone());
        Ok(v)
    }

    pub fn monomial(&mut self, v: &[i64]) -> Result<BigRational> {
        let mut r = BigRational::one();
        for (i, &e) in v.iter().enumerate() {
            if e != 0 {
                r *= self.pow(i, e)?;
            }
        }
        Ok(r)
    }

    /// `1 - z^v`
    pub fn binomial(&mut self, v: &[i64]) -> Result<BigRational> {
        if let Some(x) = self.factors.get(v) {
            return Ok(x.clone());
        }
        let x = BigRational::one() - self.monomial(v)?;
        if x.is_zero() {
            return Err(Error::VanishingDenominator);
        }
        self.factors.insert(v.to_vec(), x.clone());
        Ok(x)
    }

    pub fn denominator(&mut self, den: &[FactorAtom]) -> Result<BigRational> {
        let mut r = BigRational::one();
        for f in den {
            r *= num_traits::pow(self.binomial(&f.vector)?, f.multiplicity as usize);
        }
        Ok(r)
    }

    pub fn term(&mut self, t: &GFTerm, b: &[i64]) -> Result<BigRational> {
        let c = t.coefficient.eval(b);
        if c.is_zero() {
            return Ok(c);
        }
        let mut v = c;
        for (i, e) in t.exponents.iter().enumerate() {
            let e = e.eval_int(b)?;
            v *= self.pow(i, e)?;
        }
        Ok(v / self.denominator(&t.denominator)?)
    }
}

/// Random rational point whose coordinates are ratios of distinct primes,
/// so no nonzero monomial evaluates to 1.
fn random_point(rng: &mut ChaCha8Rng, nv: usize) -> Vec<BigRational> {
    assert!(2 * nv <= PRIMES.len(), "too many variables for the sampling primes");
    let mut idx: Vec<usize> = (0..PRIMES.len()).collect();
    for i in 0..idx.len() {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    (0..nv)
        .map(|i| {
            let (p, q) = (PRIMES[idx[2 * i]], PRIMES[idx[2 * i + 1]]);
            let s = if rng.random_bool(0.5) { 1 } else { -1 };
            BigRational::new((s * p).into(), q.into())
        })
        .collect()
}

/// Constant term in `x` of a source term at parameters `b` and values `w`
/// of the other variables.
fn source_constant_term(t: &GFTerm, x: usize, b: &[i64], cache: &mut PointCache) -> Result<BigRational> {
    let mut v = t.coefficient.eval(b);
    if v.is_zero() {
        return Ok(v);
    }
    let mut e = 0i64;
    for (i, ex) in t.exponents.iter().enumerate() {
        let k = ex.eval_int(b)?;
        if i == x {
            e = k;
        } else {
            v *= cache.pow(i, k)?;
        }
    }
    let mut poles: Vec<(usize, BigRational, u32)> = Vec::new();
    for f in &t.denominator {
        let a = f.vector[x];
        let mut rest = f.vector.clone();
        rest[x] = 0;
        if a == 0 {
            v /= num_traits::pow(cache.binomial(&rest)?, f.multiplicity as usize);
            continue;
        }
        let w = cache.monomial(&rest)?;
        if a > 0 {
            poles.push((a as usize, w, f.multiplicity));
        } else {
            // 1 - w x^{-a'} = -w x^{-a'} (1 - w^{-1} x^{a'})
            let mu = f.multiplicity as usize;
            v /= num_traits::pow(-w.clone(), mu);
            e += -a * f.multiplicity as i64;
            poles.push(((-a) as usize, w.recip(), f.multiplicity));
        }
    }
    if e > 0 {
        return Ok(BigRational::zero());
    }
    let n = (-e) as usize;
    let s = weighted_inverse_series(&poles, n);
    Ok(v * &s[n])
}

/// Result of verifying one stage.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageCheck {
    pub samples: usize,
    pub active_source_terms: usize,
}

pub struct StageVerifier {
    pub samples: usize,
    pub seed: u64,
    pub param_range: (i64, i64),
}

impl StageVerifier {
    pub fn verify(
        &self,
        source: &[GuardedTerm],
        output: &[GuardedTerm],
        x: usize,
        nparams: usize,
        mode: Parallelism,
    ) -> Result<StageCheck> {
        let nv = source.first().map(|t| t.term.exponents.len()).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let jobs: Vec<(Vec<i64>, Vec<BigRational>, BigRational)> = (0..self.samples)
            .map(|_| {
                let b: Vec<i64> = (0..nparams).map(|_| rng.random_range(self.param_range.0..=self.param_range.1)).collect();
                let mut w = random_point(&mut rng, nv + 1);
                let x0 = w.pop().expect("extra coordinate");
                (b, w, x0)
            })
            .collect();
        let active = par::try_map(mode, &jobs, |(b, w, x0)| self.check_sample(source, output, x, b, w, x0))?;
        Ok(StageCheck { samples: jobs.len(), active_source_terms: active.iter().sum() })
    }

    fn check_sample(
        &self,
        source: &[GuardedTerm],
        output: &[GuardedTerm],
        x: usize,
        b: &[i64],
        w: &[BigRational],
        x0: &BigRational,
    ) -> Result<usize> {
        let fail = |detail: String| Error::Resummation { stage: format!("elimination of z{}", x + 1), detail };
        let mut cache = PointCache::new(w.to_vec());
        let mut with_x = w.to_vec();
        with_x[x] = x0.clone();
        let mut cache_x = PointCache::new(with_x);
        let mut lhs = BigRational::zero();
        let mut active = 0;
        for t in source {
            if !t.guards.holds(b)? {
                continue;
            }
            active += 1;
            lhs += source_constant_term(&t.term, x, b, &mut cache).map_err(|e| fail(format!("source term: {e}")))?;
            // normalization identity at a point including x
            let direct = cache_x.term(&t.term, b).map_err(|e| fail(format!("source value: {e}")))?;
            let norm = normalize(&t.term, x)?;
            let mut den = cache_x.denominator(&norm.keep)?;
            for (v, mu) in &norm.poles {
                den *= num_traits::pow(cache_x.binomial(v)?, *mu as usize);
            }
            let mut num = BigRational::zero();
            for (cf, ex) in &norm.pieces {
                let mut m = cf.eval(b);
                for (i, e) in ex.iter().enumerate() {
                    m *= cache_x.pow(i, e.eval_int(b)?)?;
                }
                num += m;
            }
            if num / den != direct {
                return Err(fail(format!("normalization changed a term's value at b = {b:?}")));
            }
        }
        let mut rhs = BigRational::zero();
        for t in output {
            if t.guards.holds(b)? {
                rhs += cache.term(&t.term, b).map_err(|e| fail(format!("output term: {e}")))?;
            }
        }
        if lhs != rhs {
            return Err(fail(format!("constant term {lhs} but output sums to {rhs} at b = {b:?}")));
        }
        Ok(active)
    }
}

/// Power series coefficient of `prod 1/(1 - z^{a_k})^{mu_k}` at `n` by
/// direct convolution; the independent check for the final stage.
pub(crate) fn plain_series_coefficient(alphas: &[(u64, u32)], n: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    crate::arith::partition_counts(alphas, n as usize)[n as usize].clone()
}
