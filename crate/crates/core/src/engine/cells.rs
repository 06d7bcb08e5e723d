//! Cells of a central hyperplane arrangement inside a pointed cone.
//!
//! Cells are open polyhedral cones, found by cutting the cone with one
//! hyperplane at a time. Feasibility and interior points come from
//! Fourier-Motzkin on the slice `sum b = 1`, which is bounded because the
//! cone lies in the nonnegative orthant.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::system::{determinant, subsets};
use crate::arith::fm::{find_point, Halfspace};
use crate::par::{self, Parallelism};

/// An open cell: `w . b > 0` for every wall `w`, inside the cone.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    /// Irredundant inward normals, sorted.
    pub walls: Vec<Vec<i64>>,
    /// An integer point of the open cell.
    pub interior: Vec<i64>,
}

/// Primitive representative up to sign: gcd 1, first nonzero entry positive.
pub fn primitive(v: &[i64]) -> Option<Vec<i64>> {
    let g = v.iter().fold(0i64, |acc, &c| acc.gcd(&c));
    if g == 0 {
        return None;
    }
    let s = if v.iter().find(|&&c| c != 0).copied().unwrap_or(0) < 0 { -g } else { g };
    Some(v.iter().map(|&c| c / s).collect())
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inward facet normals of the cone spanned by `columns` (vectors in
/// `R^n` spanning it).
pub fn cone_facets(columns: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    if n == 1 {
        return vec![vec![1]];
    }
    let mut out: Vec<Vec<i64>> = Vec::new();
    for sub in subsets(columns.len(), n - 1) {
        // generalized cross product of the chosen columns
        let normal: Vec<i64> = (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    (0..n).filter(|&r| r != j).map(|r| sub.iter().map(|&k| columns[k][r]).collect()).collect();
                let d = determinant(&minor).to_i64().expect("small minor");
                if j % 2 == 0 { d } else { -d }
            })
            .collect();
        let Some(p) = primitive(&normal) else { continue };
        let signs: Vec<i64> = columns.iter().map(|c| dot(&p, c).signum()).collect();
        let normal = if signs.iter().all(|&s| s >= 0) {
            p
        } else if signs.iter().all(|&s| s <= 0) {
            p.iter().map(|c| -c).collect()
        } else {
            continue;
        };
        if !out.contains(&normal) {
            out.push(normal);
        }
    }
    out.sort();
    out
}

#[derive(Clone)]
struct Work {
    walls: Vec<Vec<i64>>,
    point: Vec<BigRational>,
}

fn rows_for(walls: &[Vec<i64>], extra: Option<&[i64]>, n: usize) -> Vec<Halfspace> {
    let mut rows: Vec<Halfspace> =
        walls.iter().map(|w| Halfspace::from_ints(&w.iter().map(|c| -c).collect::<Vec<_>>(), 0, true)).collect();
    if let Some(e) = extra {
        rows.push(Halfspace::from_ints(&e.iter().map(|c| -c).collect::<Vec<_>>(), 0, true));
    }
    rows.push(Halfspace::from_ints(&vec![1; n], 1, false));
    rows.push(Halfspace::from_ints(&vec![-1; n], -1, false));
    rows
}

fn sign_at(h: &[i64], p: &[BigRational]) -> i32 {
    let v: BigRational = h.iter().zip(p).map(|(&c, x)| x * BigRational::from_integer(c.into())).sum();
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Drops walls implied by the others.
///
/// Redundancy is tested on the slice `sum b = 1`, which meets every face of
/// a cone inside the orthant except the apex. For `n = 1` the only facet is
/// the apex itself, so nothing is pruned.
fn prune(mut walls: Vec<Vec<i64>>, n: usize) -> Vec<Vec<i64>> {
    if n == 1 {
        return walls;
    }
    let mut i = 0;
    while i < walls.len() {
        let flipped: Vec<i64> = walls[i].iter().map(|c| -c).collect();
        let others: Vec<Vec<i64>> = walls.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, w)| w.clone()).collect();
        if find_point(&rows_for(&others, Some(&flipped), n)).is_none() {
            walls.remove(i);
        } else {
            i += 1;
        }
    }
    walls
}

fn cut(cell: &Work, h: &[i64], n: usize) -> Vec<Work> {
    let s = sign_at(h, &cell.point);
    let mut out = Vec::with_capacity(2);
    for side in [1i32, -1] {
        let normal: Vec<i64> = h.iter().map(|&c| c * side as i64).collect();
        if s == side {
            out.push(Work { walls: cell.walls.iter().cloned().chain([normal]).collect(), point: cell.point.clone() });
            continue;
        }
        if let Some(p) = find_point(&rows_for(&cell.walls, Some(&normal), n)) {
            out.push(Work { walls: cell.walls.iter().cloned().chain([normal]).collect(), point: p });
        }
    }
    if out.len() == 1 {
        // the hyperplane misses the cell
        return vec![cell.clone()];
    }
    out.into_iter().map(|w| Work { walls: prune(w.walls, n), point: w.point }).collect()
}

/// Full-dimensional cells of the arrangement inside the cone with the given
/// inward facet normals, in a canonical order.
pub fn arrangement_cells(facets: &[Vec<i64>], hyperplanes: &[Vec<i64>], n: usize, mode: Parallelism) -> Vec<Cell> {
    let Some(p) = find_point(&rows_for(facets, None, n)) else { return Vec::new() };
    let mut cells = vec![Work { walls: prune(facets.to_vec(), n), point: p }];
    for h in hyperplanes {
        if facets.iter().any(|f| primitive(f) == primitive(h)) {
            continue;
        }
        cells = par::flat_map(mode, &cells, |c| cut(c, h, n));
    }
    let mut out: Vec<Cell> = cells
        .into_iter()
        .map(|w| {
            let l = w.point.iter().fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(x.denom()));
            let interior: Vec<i64> =
                w.point.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer().to_i64().expect("small")).collect();
            let g = interior.iter().fold(0i64, |acc, &c| acc.gcd(&c)).max(1);
            let mut walls = w.walls;
            walls.sort();
            Cell { walls, interior: interior.iter().map(|c| c / g).collect() }
        })
        .collect();
    out.sort();
    out
}
