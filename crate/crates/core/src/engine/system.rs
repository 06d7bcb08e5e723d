use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::AffineForm;
use crate::error::{Error, Result};

/// A nonnegative integer matrix with no zero column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemMatrix {
    rows: Vec<Vec<i64>>,
}

impl SystemMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Malformed("matrix must have at least one row and one column".into()));
        }
        let d = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Malformed(format!("row {} has {} entries, expected {d}", i + 1, r.len())));
            }
            if let Some(j) = r.iter().position(|&x| x < 0) {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
        }
        if let Some(k) = (0..d).find(|&k| rows.iter().all(|r| r[k] == 0)) {
            return Err(Error::ZeroColumn(k));
        }
        Ok(SystemMatrix { rows })
    }

    /// Parses `m d` followed by `m` rows of `d` integers. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            let nums = line
                .split_whitespace()
                .map(|tok| tok.parse::<i64>().map_err(|_| Error::Malformed(format!("not an integer: {tok:?}"))))
                .collect::<Result<Vec<i64>>>()?;
            if !nums.is_empty() {
                lines.push(nums);
            }
        }
        let Some((header, body)) = lines.split_first() else {
            return Err(Error::Malformed("missing header \"m d\"".into()));
        };
        let &[m, d] = header.as_slice() else {
            return Err(Error::Malformed("header must be \"m d\"".into()));
        };
        if m <= 0 || d <= 0 {
            return Err(Error::Malformed("dimensions must be positive".into()));
        }
        if body.len() != m as usize {
            return Err(Error::Malformed(format!("expected {m} rows, found {}", body.len())));
        }
        for (i, row) in body.iter().enumerate() {
            if row.len() != d as usize {
                return Err(Error::Malformed(format!("row {} has {} entries, expected {d}", i + 1, row.len())));
            }
        }
        Self::new(body.to_vec())
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, k: usize) -> i64 {
        self.rows[i][k]
    }

    pub fn column(&self, k: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.d()).map(|k| self.column(k)).collect()
    }

    /// The vector `r` of row sums; `A * (1,...,1) = r`.
    pub fn row_sums(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn rank(&self) -> usize {
        self.row_reduction().independent.len()
    }

    /// Picks a maximal set of independent rows (greedily, in order) and
    /// expresses every other row as an integer linear relation.
    pub fn row_reduction(&self) -> RowReduction {
        let m = self.m();
        let mut basis: Vec<Vec<BigRational>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut independent = Vec::new();
        for i in 0..m {
            let mut r: Vec<BigRational> = self.rows[i].iter().map(|&x| BigRational::from_integer(x.into())).collect();
            for (b, &p) in basis.iter().zip(&pivots) {
                if !r[p].is_zero() {
                    let f = r[p].clone() / &b[p];
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= &f * y;
                    }
                }
            }
            if let Some(p) = r.iter().position(|x| !x.is_zero()) {
                basis.push(r);
                pivots.push(p);
                independent.push(i);
            }
        }
        let mut equalities = Vec::new();
        for i in 0..m {
            if independent.contains(&i) {
                continue;
            }
            let lambda = self.solve_combination(&independent, i);
            let den = lambda.iter().fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
            let mut coeffs = vec![(i, den.to_i64().expect("small relation"))];
            for (&j, l) in independent.iter().zip(&lambda) {
                let c = (l * BigRational::from_integer(den.clone())).to_integer();
                coeffs.push((j, -c.to_i64().expect("small relation")));
            }
            let f = AffineForm::new(coeffs, 0);
            let g = f.content();
            equalities.push(if g > 1 {
                AffineForm::new(f.coeffs().iter().map(|&(j, c)| (j, c / g)), 0)
            } else {
                f
            });
        }
        RowReduction { independent, equalities }
    }

    /// Coefficients `lambda` with `row_target = sum lambda_j row_{basis_j}`.
    fn solve_combination(&self, basis: &[usize], target: usize) -> Vec<BigRational> {
        let r = basis.len();
        let d = self.d();
        // Augmented system M^T lambda = row_target, solved by elimination on
        // the d equations.
        let mut eqs: Vec<Vec<BigRational>> = (0..d)
            .map(|k| {
                let mut e: Vec<BigRational> =
                    basis.iter().map(|&j| BigRational::from_integer(self.rows[j][k].into())).collect();
                e.push(BigRational::from_integer(self.rows[target][k].into()));
                e
            })
            .collect();
        let mut row = 0;
        let mut pivot_cols = Vec::new();
        for col in 0..r {
            let Some(p) = (row..d).find(|&k| !eqs[k][col].is_zero()) else { continue };
            eqs.swap(row, p);
            let inv = eqs[row][col].recip();
            for x in eqs[row].iter_mut() {
                *x *= &inv;
            }
            for k in 0..d {
                if k != row && !eqs[k][col].is_zero() {
                    let f = eqs[k][col].clone();
                    let pr = eqs[row].clone();
                    for (x, y) in eqs[k].iter_mut().zip(&pr) {
                        *x -= &f * y;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
        let mut lambda = vec![BigRational::zero(); r];
        for (k, &c) in pivot_cols.iter().enumerate() {
            lambda[c] = eqs[k][r].clone();
        }
        lambda
    }

    /// Lcm of the nonzero maximal minors. For a matrix of full row rank
    /// every chamber quasi-polynomial has period dividing it in each
    /// coordinate: its periodic parts are characters of the finite groups
    /// `Z^m / A_s Z^m` over the bases `s`.
    pub fn minor_lcm(&self) -> u64 {
        let m = self.m();
        let mut l = 1u64;
        for cs in subsets(self.d(), m) {
            let mat: Vec<Vec<i64>> = self.rows.iter().map(|r| cs.iter().map(|&j| r[j]).collect()).collect();
            let det = determinant(&mat).abs().to_u64().expect("small minor");
            if det != 0 {
                l = l.lcm(&det);
            }
        }
        l
    }

    /// The submatrix on the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> SystemMatrix {
        SystemMatrix { rows: rows.iter().map(|&i| self.rows[i].clone()).collect() }
    }

    pub fn is_unimodular(&self) -> bool {
        let m = self.m();
        let d = self.d();
        for k in 1..=m.min(d) {
            for rs in subsets(m, k) {
                for cs in subsets(d, k) {
                    let mat: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| self.rows[i][j]).collect()).collect();
                    if determinant(&mat).abs() > BigInt::one() {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} {}\n", self.m(), self.d());
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Result of [`SystemMatrix::row_reduction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowReduction {
    /// Indices of a maximal independent set of rows.
    pub independent: Vec<usize>,
    /// One form per dependent row; `form(b) = 0` for every `b` in the
    /// column span.
    pub equalities: Vec<AffineForm>,
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exact determinant by fraction-free elimination.
pub(crate) fn determinant(mat: &[Vec<i64>]) -> BigInt {
    let n = mat.len();
    let mut a: Vec<Vec<BigInt>> = mat.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> SystemMatrix {
        SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap()
    }

    #[test]
    fn parse_with_comments() {
        let a = SystemMatrix::parse("# example\n2 4\n1 2 1 0  # row 1\n\n1 1 0 1\n").unwrap();
        assert_eq!(a, worked());
        assert_eq!(a.row_sums(), vec![4, 3]);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SystemMatrix::parse("1 2\n1 3\n").unwrap(), SystemMatrix::new(vec![vec![1, 3]]).unwrap());
        assert_eq!(SystemMatrix::parse("2 2\n1 0\n1 0\n"), Err(Error::ZeroColumn(1)));
        assert_eq!(SystemMatrix::parse("1 2\n1 -1\n"), Err(Error::NegativeEntry { row: 0, col: 1 }));
        assert!(matches!(SystemMatrix::parse("1 2\n1\n"), Err(Error::Malformed(_))));
        assert!(matches!(SystemMatrix::parse("1 x\n1\n"), Err(Error::Malformed(_))));
    }

    #[test]
    fn dependent_rows_become_equalities() {
        let a = SystemMatrix::new(vec![vec![1, 2, 0], vec![0, 1, 1], vec![2, 5, 1]]).unwrap();
        let red = a.row_reduction();
        assert_eq!(red.independent, vec![0, 1]);
        // row3 = 2 row1 + row2
        assert_eq!(red.equalities, vec![AffineForm::new([(2, 1), (0, -2), (1, -1)], 0)]);
        let b = [3, 4, 10];
        assert_eq!(red.equalities[0].eval(&b).unwrap(), 0);
    }

    #[test]
    fn unimodularity() {
        assert!(SystemMatrix::new(vec![vec![1, 1, 1], vec![0, 1, 1]]).unwrap().is_unimodular());
        assert!(!worked().is_unimodular());
        assert_eq!(determinant(&[vec![2, 1], vec![1, 1]]), BigInt::one());
        assert_eq!(determinant(&[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]]), BigInt::from(-2));
    }
}
