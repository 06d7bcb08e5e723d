use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(n.into(), d.into())
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(n.into())
}

/// Sum of rationals over a running common denominator, reduced once at
/// the end; much cheaper than repeated `BigRational` additions, which take
/// a gcd every time.
#[derive(Clone, Debug)]
pub struct RatSum {
    num: BigInt,
    den: BigInt,
}

impl Default for RatSum {
    fn default() -> Self {
        RatSum { num: BigInt::zero(), den: BigInt::one() }
    }
}

impl RatSum {
    /// Adds `c * k`.
    pub fn add_scaled(&mut self, c: &Q, k: &BigInt) {
        if k.is_zero() || c.is_zero() {
            return;
        }
        let cd = c.denom();
        if !(&self.den % cd).is_zero() {
            let l = self.den.lcm(cd);
            self.num *= &l / &self.den;
            self.den = l;
        }
        self.num += c.numer() * k * (&self.den / cd);
    }

    pub fn add(&mut self, c: &Q) {
        self.add_scaled(c, &BigInt::one());
    }

    pub fn finish(self) -> Q {
        BigRational::new(self.num, self.den)
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Serialization form, always `"p/q"` with `q >= 1`.
pub fn format_rational(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Renders a nonnegative coefficient times an optional monomial the way the
/// worked examples print them: `3*b/2`, `b^2/2`, `7/8`, `a`.
pub fn render_rational_coeff(c: &Q, monomial: Option<&str>) -> String {
    let (n, d) = (c.numer(), c.denom());
    let mut s = match monomial {
        Some(m) if n.is_one() => m.to_string(),
        Some(m) => format!("{n}*{m}"),
        None => n.to_string(),
    };
    if !d.is_one() {
        s.push('/');
        s.push_str(&d.to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/8", "5/1", "0/1"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("6/8").unwrap(), q(3, 4));
        assert_eq!(parse_rational("12").unwrap(), qi(12));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn coefficient_rendering() {
        assert_eq!(render_rational_coeff(&q(3, 2), Some("b")), "3*b/2");
        assert_eq!(render_rational_coeff(&q(1, 2), Some("b^2")), "b^2/2");
        assert_eq!(render_rational_coeff(&qi(1), None), "1");
        assert_eq!(render_rational_coeff(&q(7, 8), None), "7/8");
    }
}
