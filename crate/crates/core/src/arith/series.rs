use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::factor::FactorKind;
use super::term::GFExpression;
use crate::error::{Error, Result};

/// Coefficient of `z^n` (z = variable `var`) in the power-series expansion at
/// 0 of a one-variable expression with concrete exponents.
pub fn series_coefficient(expr: &GFExpression, var: usize, n: i64) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for t in &expr.terms {
        let c = t.coefficient.as_constant().ok_or(Error::ParametricExponent)?;
        let mut shift = 0i64;
        for (i, e) in t.exponents.iter().enumerate() {
            let e = e.as_integer().ok_or(Error::ParametricExponent)?;
            if i == var {
                shift = e;
            } else if e != 0 {
                return Err(Error::NotExpandable(format!("exponent of z{} in a one-variable series", i + 1)));
            }
        }
        let k = n - shift;
        if k < 0 {
            continue;
        }
        let mut factors = Vec::with_capacity(t.denominator.len());
        for f in &t.denominator {
            let a = f.vector.get(var).copied().unwrap_or(0);
            let other = f.vector.iter().enumerate().any(|(i, &x)| i != var && x != 0);
            if a <= 0 || other {
                return Err(Error::NotExpandable(f.to_string()));
            }
            factors.push((f.kind.clone(), a as usize, f.multiplicity));
        }
        let s = inverse_series(&factors, k as usize);
        total += c * BigRational::from_integer(s[k as usize].clone());
    }
    Ok(total)
}

/// Power series of `1 / prod(factors)` up to and including `z^len`.
pub fn inverse_series(factors: &[(FactorKind, usize, u32)], len: usize) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); len + 1];
    s[0] = BigInt::one();
    for (kind, a, mult) in factors {
        for _ in 0..*mult {
            match kind {
                FactorKind::Binomial => divide_by_binomial(&mut s, *a),
                FactorKind::GeomSum(g) => {
                    // 1/GeomSum(z^a, g) = (1 - z^a) / (1 - z^{ag})
                    for k in (*a..=len).rev() {
                        let t = s[k - a].clone();
                        s[k] -= t;
                    }
                    divide_by_binomial(&mut s, a * *g as usize);
                }
            }
        }
    }
    s
}

fn divide_by_binomial(s: &mut [BigInt], a: usize) {
    for k in a..s.len() {
        let t = s[k - a].clone();
        s[k] += t;
    }
}

/// Number of ways to write each `k <= len` as a sum of parts `alpha_i`, part
/// i available in `mult_i` distinguishable colours.
pub fn partition_counts(parts: &[(u64, u32)], len: usize) -> Vec<BigInt> {
    let factors: Vec<(FactorKind, usize, u32)> =
        parts.iter().map(|&(a, m)| (FactorKind::Binomial, a as usize, m)).collect();
    inverse_series(&factors, len)
}

/// Power series of `prod_k 1/(1 - w_k x^{a_k})^{mult_k}` up to `x^len`, with
/// rational weights `w_k`.
pub fn weighted_inverse_series(factors: &[(usize, BigRational, u32)], len: usize) -> Vec<BigRational> {
    let mut s = vec![BigRational::zero(); len + 1];
    s[0] = BigRational::one();
    for (a, w, mult) in factors {
        for _ in 0..*mult {
            for k in *a..=len {
                let t = &s[k - a] * w;
                s[k] += t;
            }
        }
    }
    s
}
