//! Fourier-Motzkin elimination over exact rationals, with strict and
//! non-strict inequalities.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// `coeffs . x <= rhs`, or `<` when strict.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub coeffs: Vec<BigRational>,
    pub rhs: BigRational,
    pub strict: bool,
}

impl Halfspace {
    pub fn new(coeffs: Vec<BigRational>, rhs: BigRational, strict: bool) -> Self {
        Halfspace { coeffs, rhs, strict }
    }

    pub fn from_ints(coeffs: &[i64], rhs: i64, strict: bool) -> Self {
        Halfspace {
            coeffs: coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            rhs: BigRational::from_integer(rhs.into()),
            strict,
        }
    }

    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            self.coeffs.iter_mut().for_each(|c| *c /= &lead);
            self.rhs /= lead;
        }
        self
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// For a row with no variables left: does `0 <= rhs` (or `<`) hold?
    fn trivially_true(&self) -> bool {
        if self.strict {
            self.rhs.is_positive()
        } else {
            !self.rhs.is_negative()
        }
    }
}

/// Rows after eliminating variable `k`, or `None` if a contradiction
/// appeared.
pub fn eliminate(rows: &[Halfspace], k: usize) -> Option<Vec<Halfspace>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out: BTreeSet<Halfspace> = BTreeSet::new();
    for r in rows {
        let c = &r.coeffs[k];
        if c.is_positive() {
            pos.push(r);
        } else if c.is_negative() {
            neg.push(r);
        } else {
            out.insert(r.clone());
        }
    }
    for p in &pos {
        for n in &neg {
            let (cp, cn) = (&p.coeffs[k], -&n.coeffs[k]);
            let coeffs: Vec<BigRational> = p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| a * &cn + b * cp).collect();
            let rhs = &p.rhs * &cn + &n.rhs * cp;
            out.insert(Halfspace::new(coeffs, rhs, p.strict || n.strict).normalized());
        }
    }
    let mut kept = Vec::with_capacity(out.len());
    for r in out {
        if r.is_trivial() {
            if !r.trivially_true() {
                return None;
            }
        } else {
            kept.push(r);
        }
    }
    Some(kept)
}

/// Whether the system has a real solution.
pub fn feasible(rows: &[Halfspace]) -> bool {
    let Some(first) = rows.first() else { return true };
    let n = first.coeffs.len();
    let mut cur: Vec<Halfspace> = rows.iter().cloned().map(Halfspace::normalized).collect();
    if cur.iter().any(|r| r.is_trivial() && !r.trivially_true()) {
        return false;
    }
    for k in 0..n {
        match eliminate(&cur, k) {
            Some(next) => cur = next,
            None => return false,
        }
    }
    true
}

/// Range of variable `j` over a feasible system: (lower, upper), `None`
/// meaning unbounded in that direction. Returns `None` for an infeasible
/// system. Strictness is ignored for the bounds themselves.
#[allow(clippy::type_complexity)]
pub fn bounds(rows: &[Halfspace], j: usize) -> Option<(Option<BigRational>, Option<BigRational>)> {
    let n = rows.first().map(|r| r.coeffs.len()).unwrap_or(0);
    if rows.iter().any(|r| r.is_trivial() && !r.trivially_true()) {
        return None;
    }
    let mut cur: Vec<Halfspace> = rows.iter().filter(|r| !r.is_trivial()).cloned().collect();
    for k in (0..n).filter(|&k| k != j) {
        cur = eliminate(&cur, k)?;
    }
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for r in &cur {
        let c = &r.coeffs[j];
        let v = &r.rhs / c;
        if c.is_positive() {
            hi = Some(match hi {
                Some(h) if h <= v => h,
                _ => v,
            });
        } else {
            lo = Some(match lo {
                Some(l) if l >= v => l,
                _ => v,
            });
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return None;
        }
    }
    Some((lo, hi))
}

/// A point satisfying every row, by elimination and back-substitution;
/// each coordinate is the midpoint of its open range (or one past a
/// one-sided bound).
pub fn find_point(rows: &[Halfspace]) -> Option<Vec<BigRational>> {
    let n = rows.first()?.coeffs.len();
    if rows.iter().any(|r| r.is_trivial() && !r.trivially_true()) {
        return None;
    }
    // stages[k] involves variables 0..=k only
    let mut stages: Vec<Vec<Halfspace>> = vec![Vec::new(); n];
    let mut cur: Vec<Halfspace> = rows.iter().filter(|r| !r.is_trivial()).cloned().collect();
    for k in (0..n).rev() {
        stages[k] = cur.clone();
        if k > 0 {
            cur = eliminate(&cur, k)?;
        }
    }
    let mut point: Vec<BigRational> = Vec::with_capacity(n);
    for (k, stage) in stages.iter().enumerate() {
        let mut lo: Option<(BigRational, bool)> = None;
        let mut hi: Option<(BigRational, bool)> = None;
        for r in stage {
            let c = &r.coeffs[k];
            let mut rest = r.rhs.clone();
            for (j, x) in point.iter().enumerate() {
                rest -= &r.coeffs[j] * x;
            }
            if c.is_zero() {
                let ok = if r.strict { rest.is_positive() } else { !rest.is_negative() };
                if !ok {
                    return None;
                }
                continue;
            }
            let v = rest / c;
            if c.is_positive() {
                if hi.as_ref().is_none_or(|(h, s)| v < *h || (v == *h && r.strict && !s)) {
                    hi = Some((v, r.strict));
                }
            } else if lo.as_ref().is_none_or(|(l, s)| v > *l || (v == *l && r.strict && !s)) {
                lo = Some((v, r.strict));
            }
        }
        let x = match (lo, hi) {
            (Some((l, ls)), Some((h, hs))) => {
                if l > h || (l == h && (ls || hs)) {
                    return None;
                }
                (l + h) / BigRational::from_integer(2.into())
            }
            (Some((l, _)), None) => l + BigRational::from_integer(1.into()),
            (None, Some((h, _))) => h - BigRational::from_integer(1.into()),
            (None, None) => BigRational::zero(),
        };
        point.push(x);
    }
    Some(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::qi;

    #[test]
    fn triangle_bounds() {
        // x >= 0, y >= 0, x + 2y <= 5, x + y <= 4
        let rows = vec![
            Halfspace::from_ints(&[-1, 0], 0, false),
            Halfspace::from_ints(&[0, -1], 0, false),
            Halfspace::from_ints(&[1, 2], 5, false),
            Halfspace::from_ints(&[1, 1], 4, false),
        ];
        assert_eq!(bounds(&rows, 0), Some((Some(qi(0)), Some(qi(4)))));
        assert_eq!(bounds(&rows, 1), Some((Some(qi(0)), Some(crate::arith::rational::q(5, 2)))));
        assert!(feasible(&rows));
    }

    #[test]
    fn strictness_matters() {
        let closed = vec![Halfspace::from_ints(&[1], 0, false), Halfspace::from_ints(&[-1], 0, false)];
        assert!(feasible(&closed));
        let open = vec![Halfspace::from_ints(&[1], 0, true), Halfspace::from_ints(&[-1], 0, false)];
        assert!(!feasible(&open));
    }

    #[test]
    fn points_are_inside() {
        // open triangle 0 < x, 0 < y, x + y < 1 on top of a closed slab
        let rows = vec![
            Halfspace::from_ints(&[-1, 0], 0, true),
            Halfspace::from_ints(&[0, -1], 0, true),
            Halfspace::from_ints(&[1, 1], 1, true),
            Halfspace::from_ints(&[1, -1], 0, false),
        ];
        let p = find_point(&rows).unwrap();
        for r in &rows {
            let lhs: BigRational = r.coeffs.iter().zip(&p).map(|(a, x)| a * x).sum();
            assert!(if r.strict { lhs < r.rhs } else { lhs <= r.rhs });
        }
        let empty = vec![Halfspace::from_ints(&[1, 1], 0, true), Halfspace::from_ints(&[-1, -1], 0, false)];
        assert_eq!(find_point(&empty), None);
    }

    #[test]
    fn unbounded_direction() {
        let rows = vec![Halfspace::from_ints(&[-1, 0], 0, false), Halfspace::from_ints(&[1, -1], 0, false)];
        let (lo, hi) = bounds(&rows, 1).unwrap();
        assert_eq!(lo, Some(qi(0)));
        assert_eq!(hi, None);
    }
}
