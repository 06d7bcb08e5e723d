//! Brute-force ground truth: counting by dynamic programming over columns,
//! interior counts, and conversion of inequality polytopes to standard form.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::fm::{self, Halfspace};
use crate::engine::system::SystemMatrix;
use crate::error::{Error, Result};

/// Largest DP box the oracle will allocate.
pub const DEFAULT_STATE_LIMIT: u64 = 1 << 24;

/// Counts for every right-hand side in the box `[0, bmax]`.
#[derive(Clone, Debug)]
pub struct CountTable {
    bmax: Vec<i64>,
    strides: Vec<usize>,
    values: Vec<BigUint>,
}

impl CountTable {
    pub fn bmax(&self) -> &[i64] {
        &self.bmax
    }

    /// Count at `b`; zero when some coordinate is negative. Panics when `b`
    /// exceeds the box.
    pub fn get(&self, b: &[i64]) -> BigUint {
        if b.iter().any(|&x| x < 0) {
            return BigUint::zero();
        }
        assert!(b.iter().zip(&self.bmax).all(|(x, m)| x <= m), "point outside the table");
        let idx: usize = b.iter().zip(&self.strides).map(|(&x, s)| x as usize * s).sum();
        self.values[idx].clone()
    }
}

fn box_size(bmax: &[i64], limit: u64) -> Result<u64> {
    let mut states: u64 = 1;
    for &x in bmax {
        states = states.saturating_mul(x as u64 + 1);
    }
    if states > limit {
        return Err(Error::ResourceLimit(format!("oracle box has {states} states, limit {limit}")));
    }
    Ok(states)
}

/// DP over columns: after processing columns `1..k` the table holds the
/// number of solutions using only those columns.
pub fn brute_table(a: &SystemMatrix, bmax: &[i64], limit: u64) -> Result<CountTable> {
    if bmax.len() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), got: bmax.len() });
    }
    let bmax: Vec<i64> = bmax.iter().map(|&x| x.max(0)).collect();
    let states = box_size(&bmax, limit)? as usize;
    let m = a.m();
    let mut strides = vec![1usize; m];
    for i in 1..m {
        strides[i] = strides[i - 1] * (bmax[i - 1] as usize + 1);
    }
    let mut values = vec![BigUint::zero(); states];
    values[0] = BigUint::one();
    for c in a.columns() {
        if c.iter().zip(&bmax).any(|(ci, bi)| ci > bi) {
            continue;
        }
        let off: usize = c.iter().zip(&strides).map(|(&ci, s)| ci as usize * s).sum();
        let mut coord = vec![0i64; m];
        for idx in 0..states {
            if coord.iter().zip(&c).all(|(x, ci)| x >= ci) {
                let prev = values[idx - off].clone();
                values[idx] += prev;
            }
            for i in 0..m {
                coord[i] += 1;
                if coord[i] <= bmax[i] {
                    break;
                }
                coord[i] = 0;
            }
        }
    }
    Ok(CountTable { bmax, strides, values })
}

/// Number of `x >= 0` integral with `A x = b`.
pub fn brute_count(a: &SystemMatrix, b: &[i64]) -> Result<BigUint> {
    if b.len() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), got: b.len() });
    }
    if b.iter().any(|&x| x < 0) {
        return Ok(BigUint::zero());
    }
    Ok(brute_table(a, b, DEFAULT_STATE_LIMIT)?.get(b))
}

/// Number of `x >= 1` integral with `A x = b`, via `x -> x + 1`.
pub fn brute_count_interior(a: &SystemMatrix, b: &[i64]) -> Result<BigUint> {
    let shifted: Vec<i64> = b.iter().zip(a.row_sums()).map(|(x, r)| x - r).collect();
    brute_count(a, &shifted)
}

/// Direct enumeration of solutions with every `x_k >= lower`; independent of
/// the DP and only meant for small right-hand sides.
pub fn enumerate_count(a: &SystemMatrix, b: &[i64], lower: i64) -> u64 {
    fn go(cols: &[Vec<i64>], k: usize, rest: &mut [i64], lower: i64) -> u64 {
        if k == cols.len() {
            return rest.iter().all(|&x| x == 0) as u64;
        }
        let c = &cols[k];
        // largest multiple that keeps every coordinate nonnegative
        let cap = c.iter().zip(rest.iter()).filter(|(ci, _)| **ci > 0).map(|(ci, r)| r.div_floor(ci)).min();
        let Some(cap) = cap else { return 0 };
        let mut total = 0;
        let mut x = lower;
        while x <= cap {
            for (r, ci) in rest.iter_mut().zip(c) {
                *r -= x * ci;
            }
            if rest.iter().all(|&r| r >= 0) {
                total += go(cols, k + 1, rest, lower);
            }
            for (r, ci) in rest.iter_mut().zip(c) {
                *r += x * ci;
            }
            x += 1;
        }
        total
    }
    let mut rest = b.to_vec();
    go(&a.columns(), 0, &mut rest, lower)
}

/// One inequality `coeffs . x <= rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

/// Parses lines of the form `a1 ... ad <= b`; `#` starts a comment.
pub fn parse_polytope(text: &str) -> Result<Vec<Inequality>> {
    let mut out: Vec<Inequality> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = line.split_once("<=") else {
            return Err(Error::Malformed(format!("line {}: expected \"a1 ... ad <= b\"", ln + 1)));
        };
        let int = |t: &str| t.parse::<i64>().map_err(|_| Error::Malformed(format!("line {}: not an integer: {t:?}", ln + 1)));
        let coeffs = lhs.split_whitespace().map(int).collect::<Result<Vec<i64>>>()?;
        let rhs = int(rhs.trim())?;
        if coeffs.is_empty() {
            return Err(Error::Malformed(format!("line {}: no coefficients", ln + 1)));
        }
        if let Some(first) = out.first() {
            if first.coeffs.len() != coeffs.len() {
                return Err(Error::Malformed(format!("line {}: expected {} coefficients", ln + 1, first.coeffs.len())));
            }
        }
        out.push(Inequality { coeffs, rhs });
    }
    if out.is_empty() {
        return Err(Error::Malformed("no inequalities".into()));
    }
    Ok(out)
}

/// `A x = b, x >= 0` with the same lattice points as a polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardFormSystem {
    pub matrix: SystemMatrix,
    pub rhs: Vec<i64>,
    /// Column indices of slack variables.
    pub slack_columns: Vec<usize>,
    /// The polytope was shifted by `-translation` into the orthant.
    pub translation: Vec<i64>,
    /// Coordinates that needed an explicit upper-bound row to make `A`
    /// nonnegative.
    pub bound_rows: Vec<usize>,
}

impl StandardFormSystem {
    /// Original coordinates of the first `dim` entries of a solution.
    pub fn original_point(&self, x: &[i64]) -> Vec<i64> {
        self.translation.iter().zip(x).map(|(t, xi)| t + xi).collect()
    }
}

fn to_q(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn q_to_i64(x: &BigRational) -> Result<i64> {
    x.to_integer().to_i64().ok_or(Error::Overflow)
}

/// Slack form of a polytope. With `nonnegativity` the orthant constraints
/// are part of the polytope; otherwise it is translated into the orthant by
/// the floor of its lower corner. Rows with negative entries are repaired by
/// adding multiples of explicit (redundant) upper-bound rows `x_j <= U_j`
/// with `U_j` the ceiling of the largest value of `x_j`, which keeps every
/// dilation's lattice points.
pub fn polytope_to_standard_form(ineqs: &[Inequality], nonnegativity: bool) -> Result<StandardFormSystem> {
    let d = ineqs.first().map(|r| r.coeffs.len()).ok_or_else(|| Error::Malformed("no inequalities".into()))?;
    if ineqs.iter().any(|r| r.coeffs.len() != d) {
        return Err(Error::Malformed("inequalities of different lengths".into()));
    }
    let mut rows: Vec<Halfspace> = ineqs.iter().map(|r| Halfspace::from_ints(&r.coeffs, r.rhs, false)).collect();
    if nonnegativity {
        for j in 0..d {
            let mut e = vec![0; d];
            e[j] = -1;
            rows.push(Halfspace::from_ints(&e, 0, false));
        }
    }
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for j in 0..d {
        let (lo, hi) = fm::bounds(&rows, j).ok_or(Error::EmptyPolytope)?;
        let (Some(lo), Some(hi)) = (lo, hi) else { return Err(Error::Unbounded(j)) };
        lower.push(q_to_i64(&lo.floor())?);
        upper.push(hi);
    }
    let translation: Vec<i64> = if nonnegativity { vec![0; d] } else { lower.clone() };
    // shifted system: a . y <= rhs - a . translation, y >= 0
    let mut body: Vec<(Vec<i64>, i64)> = Vec::new();
    for r in ineqs {
        if r.coeffs.iter().all(|&c| c == 0) {
            if r.rhs < 0 {
                return Err(Error::EmptyPolytope);
            }
            continue;
        }
        let shift: i64 = r.coeffs.iter().zip(&translation).map(|(a, t)| a * t).sum();
        body.push((r.coeffs.clone(), r.rhs - shift));
    }
    let ubound: Vec<i64> = (0..d)
        .map(|j| q_to_i64(&(&upper[j] - to_q(translation[j])).ceil()))
        .collect::<Result<Vec<i64>>>()?;
    let mut bound_rows: Vec<usize> =
        (0..d).filter(|&j| body.iter().any(|(a, _)| a[j] < 0)).collect();
    // a variable appearing in no row still needs a row to be counted
    for j in 0..d {
        if body.iter().all(|(a, _)| a[j] == 0) && !bound_rows.contains(&j) {
            bound_rows.push(j);
        }
    }
    bound_rows.sort_unstable();
    let n_ineq = body.len();
    let n_cols = d + n_ineq + bound_rows.len();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (i, (a, beta)) in body.iter().enumerate() {
        let mut row = vec![0i64; n_cols];
        row[..d].copy_from_slice(a);
        row[d + i] = 1;
        let mut beta = *beta;
        for (k, &j) in bound_rows.iter().enumerate() {
            if a[j] < 0 {
                let c = -a[j];
                row[j] += c;
                row[d + n_ineq + k] += c;
                beta += c * ubound[j];
            }
        }
        matrix.push(row);
        rhs.push(beta);
    }
    for (k, &j) in bound_rows.iter().enumerate() {
        let mut row = vec![0i64; n_cols];
        row[j] = 1;
        row[d + n_ineq + k] = 1;
        matrix.push(row);
        rhs.push(ubound[j]);
    }
    let matrix = SystemMatrix::new(matrix)?;
    Ok(StandardFormSystem { matrix, rhs, slack_columns: (d..n_cols).collect(), translation, bound_rows })
}
