use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::affine::{param_name, RatAffine};
use super::rational::{render_rational_coeff, RatSum};

/// Exponent vector of a monomial in the parameters.
pub type Monomial = Vec<u32>;

/// Polynomial in the symbolic parameters with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl ParamPoly {
    pub fn zero(nvars: usize) -> Self {
        ParamPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(c.into()))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn from_rat_affine(nvars: usize, f: &RatAffine) -> Self {
        let den = BigRational::from_integer(f.denominator().into());
        let mut p = Self::zero(nvars);
        for &(i, c) in f.numerator().coeffs() {
            let mut m = vec![0; nvars];
            m[i] = 1;
            p.add_term(m, BigRational::from_integer(c.into()) / &den);
        }
        p.add_term(vec![0; nvars], f.constant_value());
        p
    }

    /// `binom(q, j) = q (q-1) ... (q-j+1) / j!` as a polynomial.
    pub fn binomial(nvars: usize, q: &RatAffine, j: u32) -> Self {
        let mut p = Self::one(nvars);
        for i in 0..j {
            p = p.mul(&Self::from_rat_affine(nvars, &q.add_int(-(i as i64))));
        }
        let mut fact = BigInt::one();
        for i in 2..=j {
            fact *= BigInt::from(i);
        }
        p.scale(&BigRational::new(BigInt::one(), fact))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn coeff(&self, m: &[u32]) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &ParamPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &ParamPoly) -> ParamPoly {
        let mut p = self.clone();
        p.add_assign(other);
        p
    }

    pub fn neg(&self) -> ParamPoly {
        ParamPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &ParamPoly) -> ParamPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> ParamPoly {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        ParamPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut p = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                p.add_term(m, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> ParamPoly {
        let mut r = Self::one(self.nvars);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, point: &[i64]) -> BigRational {
        let mut s = RatSum::default();
        for (m, c) in &self.terms {
            s.add_scaled(c, &monomial_value(m, point));
        }
        s.finish()
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (&e, x) in m.iter().zip(point) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            s += t;
        }
        s
    }

    /// Substitutes `p_i := subs[i]` where the forms live in `nvars_out`
    /// parameters.
    pub fn compose(&self, subs: &[RatAffine], nvars_out: usize) -> ParamPoly {
        let lin: Vec<ParamPoly> = subs.iter().map(|f| Self::from_rat_affine(nvars_out, f)).collect();
        let mut out = Self::zero(nvars_out);
        for (m, c) in &self.terms {
            let mut t = Self::constant(nvars_out, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&lin[i].pow(e));
                }
            }
            out.add_assign(&t);
        }
        out
    }

    /// Coefficients of the homogeneous part of degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> ParamPoly {
        ParamPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().sum::<u32>() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        // Highest degree first, then lexicographically larger exponents first.
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (m, c) in items {
            let mono = render_monomial(m, names);
            parts.push((c.is_negative(), render_rational_coeff(&c.abs(), mono.as_deref())));
        }
        join_signed(&parts)
    }
}

pub(crate) fn render_monomial(m: &[u32], names: &[String]) -> Option<String> {
    let factors: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            let n = param_name(names, i);
            if e == 1 {
                n
            } else {
                format!("{n}^{e}")
            }
        })
        .collect();
    (!factors.is_empty()).then(|| factors.join("*"))
}

/// Joins `(negative, magnitude)` pieces with " + " / " − ".
pub(crate) fn join_signed(parts: &[(bool, String)]) -> String {
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (k, (neg, body)) in parts.iter().enumerate() {
        match (k, neg) {
            (0, true) => s.push('−'),
            (0, false) => {}
            (_, true) => s.push_str(" − "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(body);
    }
    s
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}


/// `point^m`, in machine integers while they do not overflow.
fn monomial_value(m: &[u32], point: &[i64]) -> BigInt {
    let mut acc: i128 = 1;
    for (&e, &x) in m.iter().zip(point) {
        for _ in 0..e {
            match acc.checked_mul(x as i128) {
                Some(v) => acc = v,
                None => {
                    let mut t = BigInt::one();
                    for (&e, &x) in m.iter().zip(point) {
                        t *= num_traits::pow(BigInt::from(x), e as usize);
                    }
                    return t;
                }
            }
        }
    }
    BigInt::from(acc)
}
