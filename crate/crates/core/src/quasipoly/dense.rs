use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{AffineForm, ParamPoly, RatAffine};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};

/// Upper bound on the number of residue classes of a dense table.
pub const MAX_RESIDUE_CLASSES: u64 = 1 << 20;

/// A polynomial whose coefficients depend on the residues of the
/// parameters modulo a period vector.
///
/// `coeffs[r]` is the polynomial used at points `b` with `b mod period = r`
/// (floored residues). Missing residues mean the zero polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPolynomial {
    params: Vec<String>,
    period: Vec<u64>,
    coeffs: BTreeMap<Vec<u64>, ParamPoly>,
}

impl QuasiPolynomial {
    pub fn zero(params: Vec<String>) -> Self {
        let n = params.len();
        QuasiPolynomial { params, period: vec![1; n], coeffs: BTreeMap::new() }
    }

    pub fn polynomial(params: Vec<String>, p: ParamPoly) -> Self {
        let n = params.len();
        assert_eq!(p.nvars(), n);
        let mut coeffs = BTreeMap::new();
        if !p.is_zero() {
            coeffs.insert(vec![0; n], p);
        }
        QuasiPolynomial { params, period: vec![1; n], coeffs }
    }

    pub fn from_table(params: Vec<String>, period: Vec<u64>, table: BTreeMap<Vec<u64>, ParamPoly>) -> Result<Self> {
        if period.len() != params.len() || period.iter().any(|&p| p == 0) {
            return Err(Error::Malformed("period must be positive, one entry per parameter".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (r, p) in table {
            if r.len() != period.len() || r.iter().zip(&period).any(|(x, p)| x >= p) {
                return Err(Error::Malformed(format!("residue {r:?} outside period {period:?}")));
            }
            if p.nvars() != params.len() {
                return Err(Error::ParameterMismatch);
            }
            if !p.is_zero() {
                coeffs.insert(r, p);
            }
        }
        Ok(QuasiPolynomial { params, period, coeffs })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    pub fn table(&self) -> &BTreeMap<Vec<u64>, ParamPoly> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.period.iter().all(|&p| p == 1)
    }

    /// Largest total degree over all residue classes; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.values().filter_map(|p| p.degree()).max()
    }

    pub fn residue_of(&self, point: &[i64]) -> Vec<u64> {
        point.iter().zip(&self.period).map(|(&x, &p)| x.mod_floor(&(p as i64)) as u64).collect()
    }

    pub fn coefficient_poly(&self, residue: &[u64]) -> Option<&ParamPoly> {
        self.coeffs.get(residue)
    }

    pub fn eval(&self, point: &[i64]) -> Result<BigRational> {
        if point.len() != self.nparams() {
            return Err(Error::DimensionMismatch { expected: self.nparams(), got: point.len() });
        }
        Ok(match self.coeffs.get(&self.residue_of(point)) {
            Some(p) => p.eval(point),
            None => BigRational::zero(),
        })
    }

    /// The same function over a period that is a multiple of the current one.
    pub fn lift(&self, period: &[u64]) -> Result<Self> {
        if period.len() != self.period.len() || period.iter().zip(&self.period).any(|(p, q)| p % q != 0) {
            return Err(Error::Malformed(format!("{period:?} is not a multiple of {:?}", self.period)));
        }
        check_classes(period)?;
        let mut coeffs = BTreeMap::new();
        for r in residues(period) {
            let base: Vec<u64> = r.iter().zip(&self.period).map(|(x, p)| x % p).collect();
            if let Some(p) = self.coeffs.get(&base) {
                coeffs.insert(r, p.clone());
            }
        }
        Ok(QuasiPolynomial { params: self.params.clone(), period: period.to_vec(), coeffs })
    }

    pub fn add(&self, other: &QuasiPolynomial) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::ParameterMismatch);
        }
        let period: Vec<u64> = self.period.iter().zip(&other.period).map(|(a, b)| a.lcm(b)).collect();
        let mut a = self.lift(&period)?;
        let b = other.lift(&period)?;
        for (r, p) in b.coeffs {
            let e = a.coeffs.entry(r.clone()).or_insert_with(|| ParamPoly::zero(p.nvars()));
            e.add_assign(&p);
            if e.is_zero() {
                a.coeffs.remove(&r);
            }
        }
        Ok(a.minimize())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.params.clone());
        }
        QuasiPolynomial {
            params: self.params.clone(),
            period: self.period.clone(),
            coeffs: self.coeffs.iter().map(|(r, p)| (r.clone(), p.scale(k))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigRational::from_integer((-1).into()))
    }

    /// Shrinks every period component as far as the table allows.
    pub fn minimize(mut self) -> Self {
        for i in 0..self.period.len() {
            loop {
                let p = self.period[i];
                let reduced = prime_factors(p).into_iter().any(|f| self.try_reduce(i, p / f));
                if !reduced {
                    break;
                }
            }
        }
        self
    }

    fn try_reduce(&mut self, i: usize, q: u64) -> bool {
        let ok = residues(&self.period).all(|r| {
            let mut r2 = r.clone();
            r2[i] %= q;
            self.coeffs.get(&r) == self.coeffs.get(&r2)
        });
        if ok {
            self.reduce_axis(i, q);
        }
        ok
    }

    fn reduce_axis(&mut self, i: usize, q: u64) {
        self.coeffs.retain(|r, _| r[i] < q);
        self.period[i] = q;
    }

    /// Exact interpolation of a quasi-polynomial function with the given
    /// period and per-variable degree bound.
    ///
    /// Within each residue class the function is a polynomial of degree at
    /// most `degree` in every variable, so a tensor grid of `degree + 1`
    /// points per axis determines it; the fit is exact, not approximate.
    pub fn fit<F>(params: Vec<String>, period: Vec<u64>, degree: u32, mode: Parallelism, f: F) -> Result<Self>
    where
        F: Fn(&[i64]) -> Result<BigRational> + Sync + Send,
    {
        check_classes(&period)?;
        let n = params.len();
        let classes: Vec<Vec<u64>> = residues(&period).collect();
        // binom((b_i - r_i)/P_i, j) polynomials are built per class
        let fits = par::try_map(mode, &classes, |r| -> Result<(Vec<u64>, ParamPoly)> {
            let d = degree as usize + 1;
            let total = d.pow(n as u32);
            // values on the grid u in {0..degree}^n, b_i = r_i + P_i u_i
            let mut vals: Vec<BigRational> = Vec::with_capacity(total);
            let mut u = vec![0usize; n];
            for _ in 0..total {
                let b: Vec<i64> = (0..n).map(|i| r[i] as i64 + period[i] as i64 * u[i] as i64).collect();
                vals.push(f(&b)?);
                advance(&mut u, d);
            }
            // forward differences along each axis give Newton coefficients
            let mut stride = 1;
            for _axis in 0..n {
                for level in 1..d {
                    for idx in (0..total).rev() {
                        let k = (idx / stride) % d;
                        if k >= level {
                            let prev = vals[idx - stride].clone();
                            vals[idx] -= prev;
                        }
                    }
                }
                stride *= d;
            }
            let basis: Vec<Vec<ParamPoly>> = (0..n)
                .map(|i| {
                    let ui = RatAffine::new(AffineForm::new([(i, 1)], -(r[i] as i64)), period[i] as i64);
                    (0..d).map(|j| ParamPoly::binomial(n, &ui, j as u32)).collect()
                })
                .collect();
            let mut poly = ParamPoly::zero(n);
            let mut u = vec![0usize; n];
            for v in vals.iter() {
                if !v.is_zero() {
                    let mut t = ParamPoly::constant(n, v.clone());
                    for i in 0..n {
                        if u[i] > 0 {
                            t = t.mul(&basis[i][u[i]]);
                        }
                    }
                    poly.add_assign(&t);
                }
                advance(&mut u, d);
            }
            Ok((r.clone(), poly))
        })?;
        let table: BTreeMap<Vec<u64>, ParamPoly> = fits.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(QuasiPolynomial { params, period, coeffs: table }.minimize())
    }

    /// `result(b') = self(subs(b'))` where `subs` are forms in the new
    /// parameters.
    pub fn compose_affine(&self, subs: &[AffineForm], new_params: Vec<String>) -> Result<Self> {
        if subs.len() != self.nparams() {
            return Err(Error::DimensionMismatch { expected: self.nparams(), got: subs.len() });
        }
        let n = new_params.len();
        let mut period = vec![1u64; n];
        for (f, &p) in subs.iter().zip(&self.period) {
            for &(j, c) in f.coeffs() {
                if j >= n {
                    return Err(Error::MissingParameter(j));
                }
                let pj = p / p.gcd(&c.unsigned_abs());
                period[j] = period[j].lcm(&pj);
            }
        }
        let degree = self.degree().unwrap_or(0);
        QuasiPolynomial::fit(new_params, period, degree, Parallelism::Sequential, |b| {
            let x: Vec<i64> = subs.iter().map(|f| f.eval(b)).collect::<Result<_>>()?;
            self.eval(&x)
        })
    }

    /// Polynomial-per-residue equality after lifting to a common period.
    pub fn same_function(&self, other: &QuasiPolynomial) -> bool {
        if self.nparams() != other.nparams() {
            return false;
        }
        let period: Vec<u64> = self.period.iter().zip(&other.period).map(|(a, b)| a.lcm(b)).collect();
        match (self.lift(&period), other.lift(&period)) {
            (Ok(a), Ok(b)) => a.coeffs == b.coeffs,
            _ => false,
        }
    }

    pub fn with_params(mut self, params: Vec<String>) -> Self {
        assert_eq!(params.len(), self.params.len());
        self.params = params;
        self
    }
}

fn advance(u: &mut [usize], d: usize) {
    for x in u.iter_mut() {
        *x += 1;
        if *x < d {
            return;
        }
        *x = 0;
    }
}

fn check_classes(period: &[u64]) -> Result<()> {
    let mut total: u64 = 1;
    for &p in period {
        total = total.saturating_mul(p);
    }
    if total > MAX_RESIDUE_CLASSES {
        return Err(Error::ResourceLimit(format!("{total} residue classes for period {period:?}")));
    }
    Ok(())
}

/// All residue vectors in `prod [0, period_i)`, first component fastest.
pub fn residues(period: &[u64]) -> impl Iterator<Item = Vec<u64>> + '_ {
    let total: u64 = period.iter().product();
    (0..total).map(move |mut k| {
        period
            .iter()
            .map(|&p| {
                let r = k % p;
                k /= p;
                r
            })
            .collect()
    })
}

fn prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            out.push(f);
            while m % f == 0 {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{q, qi};

    fn t() -> Vec<String> {
        vec!["t".into()]
    }

    fn floor_half_plus_one() -> QuasiPolynomial {
        QuasiPolynomial::fit(t(), vec![2], 1, Parallelism::Sequential, |b| Ok(qi(b[0].div_euclid(2) + 1))).unwrap()
    }

    #[test]
    fn fit_recovers_floor() {
        let p = floor_half_plus_one();
        assert_eq!(p.period(), &[2]);
        assert_eq!(p.degree(), Some(1));
        for n in -10..10 {
            assert_eq!(p.eval(&[n]).unwrap(), qi(n.div_euclid(2) + 1));
        }
    }

    #[test]
    fn fit_two_variables_and_minimize() {
        let params = vec!["a".to_string(), "b".to_string()];
        let f = |b: &[i64]| Ok(q(b[0] * b[1] * 3 - b[1] * b[1], 2) + qi(b[0].mod_floor(&2)));
        let p = QuasiPolynomial::fit(params, vec![4, 3], 2, Parallelism::Parallel, f).unwrap();
        assert_eq!(p.period(), &[2, 1]);
        for a in -5..5 {
            for b in -5..5 {
                assert_eq!(p.eval(&[a, b]).unwrap(), f(&[a, b]).unwrap());
            }
        }
    }

    #[test]
    fn add_scale_and_identity() {
        let p = floor_half_plus_one();
        let zero = QuasiPolynomial::zero(t());
        assert_eq!(p.add(&zero).unwrap(), p);
        assert!(p.add(&p.neg()).unwrap().is_zero());
        let other = QuasiPolynomial::zero(vec!["x".into()]);
        assert_eq!(p.add(&other), Err(Error::ParameterMismatch));
    }

    #[test]
    fn compose_square() {
        let sq = QuasiPolynomial::polynomial(vec!["n".into()], ParamPoly::var(1, 0).pow(2));
        let c = sq.compose_affine(&[AffineForm::new([(0, 2)], 1)], t()).unwrap();
        let want = ParamPoly::from_terms(1, [(vec![2], qi(4)), (vec![1], qi(4)), (vec![0], qi(1))]);
        assert_eq!(c, QuasiPolynomial::polynomial(t(), want));
    }

    #[test]
    fn even_argument_kills_oscillation() {
        // (7 + (-1)^a)/8 under a = 2t is 1
        let osc = QuasiPolynomial::fit(vec!["a".into()], vec![2], 0, Parallelism::Sequential, |b| {
            Ok(if b[0] % 2 == 0 { qi(1) } else { q(3, 4) })
        })
        .unwrap();
        let c = osc.compose_affine(&[AffineForm::new([(0, 2)], 0)], t()).unwrap();
        assert_eq!(c, QuasiPolynomial::polynomial(t(), ParamPoly::one(1)));
    }

    #[test]
    fn negative_arguments_use_floored_residues() {
        let p = floor_half_plus_one();
        assert_eq!(p.residue_of(&[-1]), vec![1]);
        assert_eq!(p.eval(&[-1]).unwrap(), qi(0));
        assert_eq!(p.eval(&[1]), Ok(qi(1)));
        assert!(matches!(p.eval(&[1, 2]), Err(Error::DimensionMismatch { .. })));
    }
}
