use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Integer-linear expression `sum_i c_i * p_i + constant` in the symbolic
/// parameters `p_0, p_1, ...`.
///
/// Zero coefficients are never stored and the remaining ones are sorted by
/// parameter index, so structural equality is equality of forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AffineForm {
    coeffs: Vec<(usize, i64)>,
    constant: i64,
}

impl AffineForm {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, i64)>, constant: i64) -> Self {
        let mut v: Vec<(usize, i64)> = coeffs.into_iter().collect();
        v.sort_unstable_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, i64)> = Vec::with_capacity(v.len());
        for (i, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|&(_, c)| c != 0);
        AffineForm { coeffs: out, constant }
    }

    pub fn constant(c: i64) -> Self {
        AffineForm { coeffs: Vec::new(), constant: c }
    }

    pub fn var(i: usize) -> Self {
        AffineForm { coeffs: vec![(i, 1)], constant: 0 }
    }

    /// Builds a form from a dense coefficient slice.
    pub fn from_dense(coeffs: &[i64], constant: i64) -> Self {
        Self::new(coeffs.iter().copied().enumerate(), constant)
    }

    pub fn coeffs(&self) -> &[(usize, i64)] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs
            .binary_search_by_key(&i, |&(j, _)| j)
            .map(|k| self.coeffs[k].1)
            .unwrap_or(0)
    }

    pub fn dense_coeffs(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(i, c) in &self.coeffs {
            if i < n {
                v[i] = c;
            }
        }
        v
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest parameter index used plus one.
    pub fn arity(&self) -> usize {
        self.coeffs.last().map(|&(i, _)| i + 1).unwrap_or(0)
    }

    pub fn eval(&self, assignment: &[i64]) -> Result<i64> {
        let mut s = self.constant as i128;
        for &(i, c) in &self.coeffs {
            let v = *assignment.get(i).ok_or(Error::MissingParameter(i))?;
            s += c as i128 * v as i128;
        }
        i64::try_from(s).map_err(|_| Error::Overflow)
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> Result<BigRational> {
        let mut s = BigRational::from_integer(self.constant.into());
        for &(i, c) in &self.coeffs {
            let v = point.get(i).ok_or(Error::MissingParameter(i))?;
            s += v * BigRational::from_integer(c.into());
        }
        Ok(s)
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        AffineForm::new(
            self.coeffs.iter().chain(other.coeffs.iter()).copied(),
            self.constant + other.constant,
        )
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> AffineForm {
        AffineForm::new(self.coeffs.iter().map(|&(i, c)| (i, c * k)), self.constant * k)
    }

    pub fn shift(&self, k: i64) -> AffineForm {
        AffineForm { coeffs: self.coeffs.clone(), constant: self.constant + k }
    }

    pub fn linear_part(&self) -> AffineForm {
        AffineForm { coeffs: self.coeffs.clone(), constant: 0 }
    }

    /// gcd of the non-constant coefficients (0 for a constant form).
    pub fn content(&self) -> i64 {
        self.coeffs.iter().fold(0i64, |g, &(_, c)| g.gcd(&c))
    }

    /// Substitutes `p_i := subs[i]` for every parameter.
    pub fn compose(&self, subs: &[AffineForm]) -> AffineForm {
        let mut out = AffineForm::constant(self.constant);
        for &(i, c) in &self.coeffs {
            out = out.add(&subs[i].scale(c));
        }
        out
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut s = String::new();
        for &(i, c) in &self.coeffs {
            let name = param_name(names, i);
            push_signed(&mut s, c, Some(&name));
        }
        if self.constant != 0 || s.is_empty() {
            push_signed(&mut s, self.constant, None);
        }
        s
    }
}

pub(crate) fn param_name(names: &[String], i: usize) -> String {
    names.get(i).cloned().unwrap_or_else(|| format!("p{}", i + 1))
}

fn push_signed(s: &mut String, c: i64, name: Option<&str>) {
    let first = s.is_empty();
    let mag = c.unsigned_abs();
    if c < 0 {
        s.push_str(if first { "−" } else { " − " });
    } else if !first {
        s.push_str(" + ");
    }
    match name {
        Some(n) if mag == 1 => s.push_str(n),
        Some(n) => {
            s.push_str(&mag.to_string());
            s.push('*');
            s.push_str(n);
        }
        None => s.push_str(&mag.to_string()),
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

/// Rational affine form `num / den` with `den > 0` and no common factor
/// between `den` and the content of `num` (coefficients and constant).
///
/// The engine's exponents take this shape: summing over the a-th roots of a
/// pole factor divides an exponent by a, and the result is integral exactly
/// on the congruence branch that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatAffine {
    num: AffineForm,
    den: i64,
}

impl RatAffine {
    pub fn new(num: AffineForm, den: i64) -> Self {
        assert!(den != 0, "zero denominator in rational form");
        let (num, den) = if den < 0 { (num.scale(-1), -den) } else { (num, den) };
        let g = num.content().gcd(&num.constant).gcd(&den);
        if g > 1 {
            let coeffs = num.coeffs.iter().map(|&(i, c)| (i, c / g)).collect();
            RatAffine { num: AffineForm { coeffs, constant: num.constant / g }, den: den / g }
        } else {
            RatAffine { num, den }
        }
    }

    pub fn integral(num: AffineForm) -> Self {
        RatAffine { num, den: 1 }
    }

    pub fn constant(c: i64) -> Self {
        RatAffine { num: AffineForm::constant(c), den: 1 }
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    pub fn numerator(&self) -> &AffineForm {
        &self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_constant() && self.num.constant == 0
    }

    /// The constant value, if the form is a constant integer.
    pub fn as_integer(&self) -> Option<i64> {
        (self.is_constant() && self.den == 1).then_some(self.num.constant)
    }

    pub fn constant_value(&self) -> BigRational {
        BigRational::new(self.num.constant.into(), self.den.into())
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        BigRational::new(self.num.coeff(i).into(), self.den.into())
    }

    pub fn add(&self, other: &RatAffine) -> RatAffine {
        let l = self.den.lcm(&other.den);
        let a = self.num.scale(l / self.den);
        let b = other.num.scale(l / other.den);
        RatAffine::new(a.add(&b), l)
    }

    pub fn add_int(&self, k: i64) -> RatAffine {
        RatAffine::new(self.num.shift(k * self.den), self.den)
    }

    pub fn neg(&self) -> RatAffine {
        RatAffine { num: self.num.scale(-1), den: self.den }
    }

    pub fn scale_int(&self, k: i64) -> RatAffine {
        RatAffine::new(self.num.scale(k), self.den)
    }

    pub fn div_int(&self, k: i64) -> RatAffine {
        RatAffine::new(self.num.clone(), self.den * k)
    }

    pub fn eval(&self, assignment: &[i64]) -> Result<BigRational> {
        Ok(BigRational::new(self.num.eval(assignment)?.into(), self.den.into()))
    }

    /// Evaluates to an integer; fails if the value is fractional.
    pub fn eval_int(&self, assignment: &[i64]) -> Result<i64> {
        let n = self.num.eval(assignment)?;
        if n % self.den != 0 {
            return Err(Error::NonIntegralExponent);
        }
        Ok(n / self.den)
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> Result<BigRational> {
        Ok(self.num.eval_rational(point)? / BigRational::from_integer(self.den.into()))
    }

    /// Substitutes an affine form for every parameter.
    pub fn compose(&self, subs: &[AffineForm]) -> RatAffine {
        RatAffine::new(self.num.compose(subs), self.den)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.den == 1 {
            self.num.render(names)
        } else if self.num.is_constant() {
            format!("{}/{}", self.num.render(names), self.den)
        } else {
            format!("({})/{}", self.num.render(names), self.den)
        }
    }
}

impl From<AffineForm> for RatAffine {
    fn from(f: AffineForm) -> Self {
        RatAffine::integral(f)
    }
}

impl fmt::Display for RatAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}
