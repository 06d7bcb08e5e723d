use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorKind {
    /// `1 - z^v`
    Binomial,
    /// `1 + z^v + ... + z^{(g-1)v}`
    GeomSum(u32),
}

/// A denominator factor raised to a positive multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorAtom {
    pub kind: FactorKind,
    pub vector: Vec<i64>,
    pub multiplicity: u32,
}

impl FactorAtom {
    pub fn binomial(vector: Vec<i64>, multiplicity: u32) -> Self {
        assert!(vector.iter().any(|&x| x != 0), "factor vector must be nonzero");
        assert!(multiplicity > 0);
        FactorAtom { kind: FactorKind::Binomial, vector, multiplicity }
    }

    pub fn geom_sum(vector: Vec<i64>, order: u32, multiplicity: u32) -> Self {
        assert!(vector.iter().any(|&x| x != 0), "factor vector must be nonzero");
        assert!(order >= 2 && multiplicity > 0);
        FactorAtom { kind: FactorKind::GeomSum(order), vector, multiplicity }
    }

    pub fn involves(&self, var: usize) -> bool {
        self.vector.get(var).is_some_and(|&x| x != 0)
    }

    /// Value of the factor itself (multiplicity 1) at `z`.
    pub fn base_value(&self, z: &[BigRational]) -> Result<BigRational> {
        let m = monomial_value(z, &self.vector)?;
        Ok(match self.kind {
            FactorKind::Binomial => BigRational::one() - m,
            FactorKind::GeomSum(g) => {
                let mut s = BigRational::zero();
                let mut p = BigRational::one();
                for _ in 0..g {
                    s += &p;
                    p *= &m;
                }
                s
            }
        })
    }

    pub fn value(&self, z: &[BigRational]) -> Result<BigRational> {
        Ok(num_traits::pow(self.base_value(z)?, self.multiplicity as usize))
    }

    pub fn render(&self, var_names: &[&str]) -> String {
        let mono = render_z_monomial(&self.vector, var_names);
        let base = match self.kind {
            FactorKind::Binomial => format!("(1 − {mono})"),
            FactorKind::GeomSum(g) => format!("GeomSum({mono}, {g})"),
        };
        if self.multiplicity == 1 {
            base
        } else {
            format!("{base}^{}", self.multiplicity)
        }
    }
}

impl fmt::Display for FactorAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

/// `prod_i z_i^{v_i}` for an integer exponent vector.
pub fn monomial_value(z: &[BigRational], v: &[i64]) -> Result<BigRational> {
    let mut r = BigRational::one();
    for (i, &e) in v.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let x = z.get(i).ok_or(Error::MissingParameter(i))?;
        r *= rational_pow(x, e)?;
    }
    Ok(r)
}

pub fn rational_pow(x: &BigRational, e: i64) -> Result<BigRational> {
    if e >= 0 {
        Ok(num_traits::pow(x.clone(), e as usize))
    } else if x.is_zero() {
        Err(Error::ZeroBaseNegativeExponent)
    } else {
        Ok(num_traits::pow(x.recip(), e.unsigned_abs() as usize))
    }
}

pub(crate) fn render_z_monomial(v: &[i64], var_names: &[&str]) -> String {
    let parts: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(i, &e)| {
            let n = var_names.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("z{}", i + 1));
            if e == 1 {
                n
            } else {
                format!("{n}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::q;

    #[test]
    fn geometric_factor_at_half() {
        let f = FactorAtom::binomial(vec![1], 1);
        assert_eq!(f.value(&[q(1, 2)]).unwrap().recip(), q(2, 1));
    }

    #[test]
    fn geom_sum_identity() {
        let v = vec![1, -2];
        let z = [q(2, 3), q(-5, 7)];
        let lhs = FactorAtom::binomial(vec![3, -6], 1).value(&z).unwrap();
        let rhs = FactorAtom::binomial(v.clone(), 1).value(&z).unwrap() * FactorAtom::geom_sum(v, 3, 1).value(&z).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn zero_base_negative_exponent() {
        assert_eq!(rational_pow(&q(0, 1), -1), Err(Error::ZeroBaseNegativeExponent));
    }
}
