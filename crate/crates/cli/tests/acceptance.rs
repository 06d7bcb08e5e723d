//! Acceptance sweep. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vpf_cli::{cmd_ehrhart, cmd_symbolic, Order};
use vpf_core::engine::system::SystemMatrix;
use vpf_core::engine::{self, EliminationReport, EngineOptions};
use vpf_core::oracle::{self, brute_table, enumerate_count, Inequality};
use vpf_core::quasipoly::{from_json, PieceQP, PiecewiseQP};

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qi(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn qb(n: num_bigint::BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn osc(a: i64) -> BigRational {
    q(7 + if a % 2 == 0 { 1 } else { -1 }, 8)
}

fn worked() -> SystemMatrix {
    SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap()
}

fn worked_formulas(a: i64, b: i64) -> [BigRational; 3] {
    [
        q(a * a, 4) + qi(a) + osc(a),
        qi(a * b) - q(a * a, 4) - q(b * b, 2) + q(a + b, 2) + osc(a),
        q(b * b + 3 * b + 2, 2),
    ]
}

/// The stated region of each worked-example formula.
fn in_stated_chamber(k: usize, a: i64, b: i64) -> bool {
    match k {
        0 => a <= b,
        1 => a - 2 <= 2 * b && b <= a + 1,
        _ => 2 * b <= a,
    }
}

/// Index of the unique piece containing `b` in its interior region.
fn piece_at(pw: &PiecewiseQP, b: &[i64]) -> usize {
    let idx = pw.applicable(b).unwrap();
    assert_eq!(idx.len(), 1, "{b:?} should lie in exactly one piece");
    idx[0]
}

fn write_matrix(dir: &Path, a: &SystemMatrix) -> std::path::PathBuf {
    let p = dir.join("matrix.txt");
    std::fs::write(&p, a.render()).unwrap();
    p
}

struct Ctx {
    dir: tempfile::TempDir,
    reports: Vec<(String, EliminationReport)>,
    sweep: Vec<SweepCase>,
}

struct SweepCase {
    a: SystemMatrix,
    rhs: Vec<Vec<i64>>,
    pw: PiecewiseQP,
}

fn criterion1(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let path = write_matrix(ctx.dir.path(), &worked());
    let json = ctx.dir.path().join("worked.json");
    cmd_symbolic(&path, Order::Auto, Some(&json)).map_err(|f| f.message)?;
    let pw = from_json(&std::fs::read_to_string(&json).unwrap()).map_err(|e| e.to_string())?;
    let reps = [piece_at(&pw, &[1, 10]), piece_at(&pw, &[10, 7]), piece_at(&pw, &[20, 2])];
    let mut points = 0;
    for a in 0..=40 {
        for b in 0..=40 {
            let f = worked_formulas(a, b);
            let value = pw.eval(&[a, b]).map_err(|e| e.to_string())?;
            for k in 0..3 {
                if !in_stated_chamber(k, a, b) {
                    continue;
                }
                points += 1;
                let piece = pw.pieces[reps[k]].qp.eval(&[a, b]).map_err(|e| e.to_string())?;
                if value != f[k] || piece != f[k] {
                    return Err(format!("formula {} at ({a},{b}): expected {}, piecewise {value}, piece {piece}", k + 1, f[k]));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ctx.reports.push(("worked symbolic".into(), engine::symbolic(&worked(), &EngineOptions::default()).unwrap().report));
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{} pieces, {points} chamber points on [0,40]^2, {elapsed:.2?}", pw.pieces.len()))
}

fn criterion2(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let path = write_matrix(ctx.dir.path(), &worked());
    let json = ctx.dir.path().join("ehrhart.json");
    cmd_ehrhart(Some(&path), Some("5,4"), None, true, Some(&json)).map_err(|f| f.message)?;
    let pw = from_json(&std::fs::read_to_string(&json).unwrap()).map_err(|e| e.to_string())?;
    let qp = match &pw.pieces[..] {
        [p] => p.qp.clone(),
        _ => return Err("expected a single quasi-polynomial".into()),
    };
    let PieceQP::Dense(qp) = qp else { return Err("sparse result".into()) };
    if qp.degree() != Some(2) || qp.period() != [2] {
        return Err(format!("degree {:?}, period {:?}", qp.degree(), qp.period()));
    }
    // degree 2 and period 2: agreement on 6 consecutive values is identity
    for t in -10..=10 {
        let expected = q(23 * t * t, 4) + q(9 * t, 2) + osc(t);
        if qp.eval(&[t]).unwrap() != expected {
            return Err(format!("coefficients differ at t = {t}"));
        }
    }
    let table = brute_table(&worked(), &[250, 200], oracle::DEFAULT_STATE_LIMIT).unwrap();
    for t in 1..=50 {
        let brute = qb(table.get(&[5 * t, 4 * t]));
        if qp.eval(&[t]).unwrap() != brute {
            return Err(format!("L({t}) differs from brute force {brute}"));
        }
    }
    let elapsed = start.elapsed();
    ctx.reports.push(("worked ehrhart".into(), engine::ehrhart(&worked(), &[5, 4], &EngineOptions::default()).unwrap().report));
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("23*t^2/4 + 9*t/2 + (7 + (-1)^t)/8, t = 1..50 match, {elapsed:.2?}"))
}

/// `m` in 1..=3, `d` in 1..=6, entries in 0..=4, no zero column.
fn random_system(rng: &mut ChaCha8Rng) -> SystemMatrix {
    let m = rng.random_range(1..=3);
    let d = rng.random_range(1..=6);
    loop {
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..d).map(|_| rng.random_range(0..=4)).collect()).collect();
        if (0..d).all(|k| rows.iter().any(|r| r[k] != 0)) {
            return SystemMatrix::new(rows).unwrap();
        }
    }
}

fn criterion3(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sparse_pieces = 0;
    let mut checked = 0;
    for n in 0..200 {
        let a = random_system(&mut rng);
        let rhs: Vec<Vec<i64>> = (0..25).map(|_| (0..a.m()).map(|_| rng.random_range(0..=25)).collect()).collect();
        let c = engine::symbolic(&a, &EngineOptions::default()).map_err(|e| format!("system {n} {:?}: {e}", a.rows()))?;
        let table = brute_table(&a, &vec![25; a.m()], oracle::DEFAULT_STATE_LIMIT).unwrap();
        for b in &rhs {
            let v = c.result.eval(b).map_err(|e| format!("system {n} {:?}: {e}", a.rows()))?;
            if v != qb(table.get(b)) {
                return Err(format!("system {n} {:?} at {b:?}: {v} vs oracle {}", a.rows(), table.get(b)));
            }
            checked += 1;
        }
        sparse_pieces += c.result.pieces.iter().filter(|p| p.qp.dense().is_none()).count();
        ctx.reports.push((format!("random system {n}"), c.report));
        ctx.sweep.push(SweepCase { a, rhs, pw: c.result });
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("200 systems, {checked} right-hand sides exact, {sparse_pieces} sparse pieces, {elapsed:.2?}"))
}

fn unimodular_set() -> Vec<SystemMatrix> {
    let mut out = vec![SystemMatrix::new(vec![vec![1, 1, 1], vec![0, 1, 1]]).unwrap()];
    // columns (1,1), (1,0), (0,1) of the worked example
    let cols = [[1, 1], [1, 0], [0, 1]];
    for mask in 1u32..8 {
        let chosen: Vec<[i64; 2]> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| cols[k]).collect();
        let rows = (0..2).map(|i| chosen.iter().map(|c| c[i]).collect()).collect();
        out.push(SystemMatrix::new(rows).unwrap());
    }
    out
}

fn criterion4(ctx: &mut Ctx) -> Outcome {
    let mut pieces = 0;
    for (n, case) in ctx.sweep.iter().enumerate() {
        let bound = case.pw.expected_degree();
        for p in &case.pw.pieces {
            pieces += 1;
            if p.qp.degree() > bound {
                return Err(format!("system {n} {:?}: piece degree {} > d - rank = {bound}", case.a.rows(), p.qp.degree()));
            }
        }
    }
    let set = unimodular_set();
    for a in &set {
        let c = engine::symbolic(a, &EngineOptions::default()).map_err(|e| e.to_string())?;
        for p in &c.result.pieces {
            let Some(qp) = p.qp.dense() else { return Err(format!("{:?}: sparse piece", a.rows())) };
            let period = qp.clone().minimize().period().to_vec();
            if period.iter().any(|&x| x != 1) {
                return Err(format!("{:?}: minimized period {period:?}", a.rows()));
            }
        }
    }
    Ok(format!("{pieces} pieces within d - rank; {} unimodular matrices have period 1", set.len()))
}

fn grid(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p| (lo..=hi).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

fn criterion5(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let c = engine::symbolic(&worked(), &EngineOptions::default()).unwrap();
    let pw = &c.result;
    let square = grid(2, 0, 40);
    for i in 0..pw.pieces.len() {
        if pw.reciprocity_partner(i, &square).map_err(|e| e.to_string())?.is_none() {
            return Err(format!("worked piece {} has no partner under (a,b) -> (-a-4,-b-3)", i + 1));
        }
    }
    let mut interior_points = 0;
    let mut paired = 0;
    for (n, case) in ctx.sweep.iter().take(20).enumerate() {
        let r = case.a.row_sums();
        for b in &case.rhs {
            let shifted: Vec<i64> = b.iter().zip(&r).map(|(x, y)| x - y).collect();
            let inner = enumerate_count(&case.a, b, 1);
            let outer = oracle::brute_count(&case.a, &shifted).unwrap();
            if BigInt::from(inner) != BigInt::from(outer.clone()) {
                return Err(format!("system {n} at {b:?}: interior {inner}, shifted count {outer}"));
            }
            interior_points += 1;
        }
        let points = grid(case.a.m(), 0, 40);
        for i in 0..case.pw.pieces.len() {
            match case.pw.reciprocity_partner(i, &points).map_err(|e| e.to_string())? {
                Some(_) => paired += 1,
                None => return Err(format!("system {n} {:?}: piece {} has no reciprocal partner", case.a.rows(), i + 1)),
            }
        }
    }
    Ok(format!(
        "worked pairing on [0,40]^2; 20 systems: {interior_points} interior counts, {paired} pieces paired on 41^m grids, {:.2?}",
        start.elapsed()
    ))
}

fn criterion6(_ctx: &mut Ctx) -> Outcome {
    let c = engine::symbolic(&worked(), &EngineOptions::default()).unwrap();
    let pw = &c.result;
    let [p1, p2, p3] = [piece_at(pw, &[1, 10]), piece_at(pw, &[10, 7]), piece_at(pw, &[20, 2])].map(|i| &pw.pieces[i].qp);
    let mut checks = 0;
    for a in 0..=40i64 {
        let mut pairs = vec![(p1, p2, a), (p1, p2, a + 1), (p2, p3, a / 2)];
        if a % 2 == 0 && a >= 2 {
            pairs.push((p2, p3, a / 2 - 1));
        }
        for (x, y, b) in pairs {
            let (u, v) = (x.eval(&[a, b]).unwrap(), y.eval(&[a, b]).unwrap());
            if u != v {
                return Err(format!("neighbouring pieces differ at ({a},{b}): {u} vs {v}"));
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} boundary points agree"))
}

fn test_polytopes() -> Vec<(&'static str, Vec<Inequality>, usize)> {
    let ineq = |coeffs: &[i64], rhs: i64| Inequality { coeffs: coeffs.to_vec(), rhs };
    vec![
        ("[0,1]", vec![ineq(&[1], 1)], 1),
        ("[0,3/2]", vec![ineq(&[2], 3)], 1),
        ("[0,2/3]", vec![ineq(&[3], 2)], 1),
        ("[1,4]", vec![ineq(&[-1], -1), ineq(&[1], 4)], 1),
        ("x+y<=1", vec![ineq(&[1, 1], 1)], 2),
        ("2x+3y<=6", vec![ineq(&[2, 3], 6)], 2),
        ("x+2y<=3", vec![ineq(&[1, 2], 3)], 2),
        ("2x+2y<=3", vec![ineq(&[2, 2], 3)], 2),
        ("y<=x<=2", vec![ineq(&[-1, 1], 0), ineq(&[1, 0], 2)], 2),
        ("quadrilateral", vec![ineq(&[1, 2], 5), ineq(&[1, 1], 4)], 2),
    ]
}

/// Lattice points strictly inside `t P` (with the orthant), by scanning a box.
fn strict_interior(ineqs: &[Inequality], t: i64) -> u64 {
    let dim = ineqs[0].coeffs.len();
    grid(dim, 1, 5 * t)
        .iter()
        .filter(|x| ineqs.iter().all(|r| r.coeffs.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<i64>() < t * r.rhs))
        .count() as u64
}

fn criterion7(ctx: &mut Ctx) -> Outcome {
    let polys = test_polytopes();
    for (name, ineqs, dim) in &polys {
        let sf = oracle::polytope_to_standard_form(ineqs, true).map_err(|e| e.to_string())?;
        let c = engine::ehrhart(&sf.matrix, &sf.rhs, &EngineOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let qp = &c.result.pieces[0].qp;
        let sign = if dim % 2 == 0 { 1 } else { -1 };
        for t in 1..=20i64 {
            let scaled: Vec<i64> = sf.rhs.iter().map(|x| t * x).collect();
            let interior = enumerate_count(&sf.matrix, &scaled, 1);
            let direct = strict_interior(ineqs, t);
            if interior != direct {
                return Err(format!("{name}: interior oracles disagree at t = {t}: {interior} vs {direct}"));
            }
            let lhs = qp.eval(&[-t]).unwrap();
            if lhs != qi(sign * interior as i64) {
                return Err(format!("{name}: L(-{t}) = {lhs}, interior count {interior}"));
            }
        }
        ctx.reports.push((format!("polytope {name}"), c.report));
    }
    Ok(format!("{} polytopes, t = 1..20", polys.len()))
}

fn criterion8(ctx: &mut Ctx) -> Outcome {
    let mut stages = 0;
    for (name, r) in &ctx.reports {
        if r.final_checked < 20 {
            return Err(format!("{name}: final step checked at {} points", r.final_checked));
        }
        for s in &r.stages {
            match &s.check {
                Some(c) if c.samples >= 20 => stages += 1,
                Some(c) => return Err(format!("{name}: stage on z{} checked at {} points", s.var + 1, c.samples)),
                None => return Err(format!("{name}: stage on z{} unchecked", s.var + 1)),
            }
        }
    }
    Ok(format!(
        "{stages} elimination stages and {} final steps re-summed at 20 points each",
        ctx.reports.len()
    ))
}

fn main() {
    let mut ctx = Ctx { dir: tempfile::tempdir().unwrap(), reports: Vec::new(), sweep: Vec::new() };
    let criteria: [(&str, fn(&mut Ctx) -> Outcome); 8] = [
        ("worked example formulas", criterion1),
        ("worked Ehrhart quasi-polynomial", criterion2),
        ("random systems vs oracle", criterion3),
        ("degree bound and unimodular periods", criterion4),
        ("reciprocity", criterion5),
        ("chamber overlap", criterion6),
        ("Ehrhart-Macdonald reciprocity", criterion7),
        ("stage re-summation", criterion8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f(&mut ctx) {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
