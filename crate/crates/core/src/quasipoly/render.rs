use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dense::{residues, QuasiPolynomial};
use super::piecewise::{Kind, Piece, PieceQP, PiecewiseQP};
use crate::arith::poly::{join_signed, render_monomial};
use crate::arith::rational::render_rational_coeff;
use crate::arith::{format_rational, parse_rational, AffineForm, Monomial, ParamPoly};
use crate::engine::constraint::{CaseConstraint, ConstraintKind, ConstraintSet};
use crate::engine::system::SystemMatrix;
use crate::error::{Error, Result};

pub const JSON_VERSION: &str = "vpf-1";

fn oscillation(names: &[String], vars: &[usize]) -> String {
    let v: Vec<&str> = vars.iter().map(|&i| names[i].as_str()).collect();
    if v.len() == 1 {
        format!("(−1)^{}", v[0])
    } else {
        format!("(−1)^({})", v.join(" + "))
    }
}

fn monomial_order(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// Period-2 coefficients as `sum_T beta_T (-1)^{sum_{i in T} b_i}`.
fn render_signed_periods(q: &QuasiPolynomial) -> String {
    let names = q.params();
    let two: Vec<usize> = (0..q.nparams()).filter(|&i| q.period()[i] == 2).collect();
    let classes: Vec<Vec<u64>> = residues(q.period()).collect();
    let mut monos: BTreeSet<Monomial> = BTreeSet::new();
    for p in q.table().values() {
        monos.extend(p.terms().map(|(m, _)| m.clone()));
    }
    let mut monos: Vec<Monomial> = monos.into_iter().collect();
    monos.sort_by(monomial_order);
    let scale = BigRational::from_integer(BigInt::from(classes.len()));
    let zero = ParamPoly::zero(q.nparams());
    let mut parts: Vec<(bool, String)> = Vec::new();
    for m in &monos {
        let mut betas: Vec<(Vec<usize>, BigRational)> = Vec::new();
        for mask in 0u32..(1 << two.len()) {
            let set: Vec<usize> = two.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &i)| i).collect();
            let mut beta = BigRational::zero();
            for r in &classes {
                let c = q.table().get(r).unwrap_or(&zero).coeff(m);
                let odd = set.iter().map(|&i| r[i]).sum::<u64>() % 2 == 1;
                if odd {
                    beta -= c;
                } else {
                    beta += c;
                }
            }
            beta /= &scale;
            if !beta.is_zero() {
                betas.push((set, beta));
            }
        }
        let mono = render_monomial(m, names);
        if let [(set, beta)] = betas.as_slice() {
            if set.is_empty() {
                parts.push((beta.is_negative(), render_rational_coeff(&beta.abs(), mono.as_deref())));
                continue;
            }
        }
        let den = betas.iter().fold(BigInt::one(), |acc, (_, b)| acc.lcm(b.denom()));
        let mut nums: Vec<(Vec<usize>, BigInt)> =
            betas.into_iter().map(|(s, b)| (s, (b * BigRational::from_integer(den.clone())).to_integer())).collect();
        let neg = nums.iter().all(|(_, n)| n.is_negative());
        if neg {
            nums.iter_mut().for_each(|(_, n)| *n = -n.clone());
        }
        let inner: Vec<(bool, String)> = nums
            .iter()
            .map(|(s, n)| {
                let body = if s.is_empty() {
                    n.abs().to_string()
                } else if n.abs().is_one() {
                    oscillation(names, s)
                } else {
                    format!("{}*{}", n.abs(), oscillation(names, s))
                };
                (n.is_negative(), body)
            })
            .collect();
        let mut body = format!("({})", join_signed(&inner));
        if let Some(mono) = mono {
            body = format!("{body}*{mono}");
        }
        if !den.is_one() {
            body = format!("{body}/{den}");
        }
        parts.push((neg, body));
    }
    join_signed(&parts)
}

/// Text form: a polynomial, `(-1)^x` oscillations for period 2, otherwise
/// one polynomial per residue class.
pub fn render_qp(q: &QuasiPolynomial) -> String {
    if q.is_zero() {
        return "0".into();
    }
    if q.period().iter().all(|&p| p <= 2) {
        return render_signed_periods(q);
    }
    let names = q.params().join(", ");
    let period: Vec<String> = q.period().iter().map(|p| p.to_string()).collect();
    let mut s = format!("by ({names}) mod ({}):", period.join(", "));
    for r in residues(q.period()) {
        let p = q.coefficient_poly(&r).map(|p| p.render(q.params())).unwrap_or_else(|| "0".into());
        let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("\n  ({}): {p}", r.join(", ")));
    }
    s
}

pub fn render_piece_qp(q: &PieceQP) -> String {
    match q {
        PieceQP::Dense(d) => render_qp(d),
        PieceQP::Sparse(s) => s.render(),
    }
}

/// Human-readable listing of the pieces.
pub fn render_text(pw: &PiecewiseQP) -> String {
    if pw.kind == Kind::Single {
        return match pw.pieces.first() {
            Some(p) => render_piece_qp(&p.qp),
            None => "0".into(),
        };
    }
    let mut s = String::new();
    for (i, p) in pw.pieces.iter().enumerate() {
        s.push_str(&format!("piece {}: {}\n", i + 1, p.constraints.render(&pw.params)));
        for line in render_piece_qp(&p.qp).lines() {
            s.push_str("  ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str("elsewhere: 0");
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonConstraint {
    #[serde(rename = "type")]
    kind: String,
    coeffs: Vec<i64>,
    constant: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    modulus: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    residue: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonTerm {
    exponents: Vec<u32>,
    #[serde(rename = "coeffsByResidue")]
    coeffs_by_residue: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPiece {
    constraints: Vec<JsonConstraint>,
    period: Vec<u64>,
    terms: Vec<JsonTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDoc {
    version: String,
    matrix: Vec<Vec<i64>>,
    kind: String,
    parameters: Vec<String>,
    pieces: Vec<JsonPiece>,
}

fn residue_key(r: &[u64]) -> String {
    r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn constraint_json(c: &CaseConstraint, n: usize) -> JsonConstraint {
    let (kind, modulus, residue) = match c.kind {
        ConstraintKind::SignGE0 => ("SignGE0", None, None),
        ConstraintKind::SignLEminus1 => ("SignLEminus1", None, None),
        ConstraintKind::Congruence { modulus, residue } => ("Congruence", Some(modulus), Some(residue)),
    };
    JsonConstraint {
        kind: kind.into(),
        coeffs: c.form.dense_coeffs(n),
        constant: c.form.constant_term(),
        modulus,
        residue,
    }
}

fn piece_json(p: &Piece, index: usize, n: usize) -> Result<JsonPiece> {
    let PieceQP::Dense(q) = &p.qp else {
        return Err(Error::ResourceLimit(format!(
            "piece {index} has no residue table (its period {:?} is too large to tabulate)",
            p.qp.period()
        )));
    };
    let mut terms: BTreeMap<Monomial, BTreeMap<String, String>> = BTreeMap::new();
    for (r, poly) in q.table() {
        for (m, c) in poly.terms() {
            terms.entry(m.clone()).or_default().insert(residue_key(r), format_rational(c));
        }
    }
    Ok(JsonPiece {
        constraints: p.constraints.items().iter().map(|c| constraint_json(c, n)).collect(),
        period: q.period().to_vec(),
        terms: terms
            .into_iter()
            .map(|(exponents, coeffs_by_residue)| JsonTerm { exponents, coeffs_by_residue })
            .collect(),
    })
}

/// The "vpf-1" JSON document, pretty-printed with a trailing newline.
/// Fails with a resource-limit error if some piece has no residue table.
pub fn to_json(pw: &PiecewiseQP) -> Result<String> {
    let n = pw.nparams();
    let doc = JsonDoc {
        version: JSON_VERSION.into(),
        matrix: pw.matrix.rows().to_vec(),
        kind: match pw.kind {
            Kind::Piecewise => "piecewise".into(),
            Kind::Single => "single".into(),
        },
        parameters: pw.params.clone(),
        pieces: pw.pieces.iter().enumerate().map(|(i, p)| piece_json(p, i + 1, n)).collect::<Result<_>>()?,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Malformed(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_constraint(c: &JsonConstraint, n: usize) -> Result<CaseConstraint> {
    if c.coeffs.len() != n {
        return Err(Error::Malformed(format!("constraint has {} coefficients, expected {n}", c.coeffs.len())));
    }
    let form = AffineForm::from_dense(&c.coeffs, c.constant);
    match (c.kind.as_str(), c.modulus, c.residue) {
        ("SignGE0", None, None) => Ok(CaseConstraint::ge0(form)),
        ("SignLEminus1", None, None) => Ok(CaseConstraint::le_minus1(form)),
        ("Congruence", Some(m), Some(r)) if m > 0 => Ok(CaseConstraint::congruence(form, m, r)),
        (k, _, _) => Err(Error::Malformed(format!("bad constraint of type {k:?}"))),
    }
}

fn parse_piece(p: &JsonPiece, params: &[String]) -> Result<Piece> {
    let n = params.len();
    let cs: Vec<CaseConstraint> = p.constraints.iter().map(|c| parse_constraint(c, n)).collect::<Result<_>>()?;
    let constraints = ConstraintSet::from_constraints(cs)
        .ok_or_else(|| Error::Malformed("piece constraints are contradictory".into()))?;
    let mut table: BTreeMap<Vec<u64>, ParamPoly> = BTreeMap::new();
    for t in &p.terms {
        if t.exponents.len() != n {
            return Err(Error::Malformed(format!("term has {} exponents, expected {n}", t.exponents.len())));
        }
        for (key, value) in &t.coeffs_by_residue {
            let r: Vec<u64> = key
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Malformed(format!("bad residue key {key:?}"))))
                .collect::<Result<_>>()?;
            let c = parse_rational(value)?;
            table.entry(r).or_insert_with(|| ParamPoly::zero(n)).add_term(t.exponents.clone(), c);
        }
    }
    let qp = QuasiPolynomial::from_table(params.to_vec(), p.period.clone(), table)?;
    Ok(Piece { constraints, qp: PieceQP::Dense(qp) })
}

/// Parses a "vpf-1" document.
pub fn from_json(text: &str) -> Result<PiecewiseQP> {
    let doc: JsonDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("JSON: {e}")))?;
    if doc.version != JSON_VERSION {
        return Err(Error::Malformed(format!("unsupported version {:?}", doc.version)));
    }
    let kind = match doc.kind.as_str() {
        "piecewise" => Kind::Piecewise,
        "single" => Kind::Single,
        k => return Err(Error::Malformed(format!("unknown kind {k:?}"))),
    };
    let matrix = SystemMatrix::new(doc.matrix)?;
    if kind == Kind::Piecewise && doc.parameters.len() != matrix.m() {
        return Err(Error::Malformed("one parameter per matrix row expected".into()));
    }
    let pieces = doc.pieces.iter().map(|p| parse_piece(p, &doc.parameters)).collect::<Result<_>>()?;
    Ok(PiecewiseQP::new(matrix, kind, doc.parameters, pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{q, qi};
    use crate::par::Parallelism;

    fn a() -> Vec<String> {
        vec!["a".into()]
    }

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn oscillating_constant() {
        let mut t = BTreeMap::new();
        t.insert(vec![0], ParamPoly::constant(1, qi(1)));
        t.insert(vec![1], ParamPoly::constant(1, q(3, 4)));
        let qp = QuasiPolynomial::from_table(a(), vec![2], t).unwrap();
        assert_eq!(render_qp(&qp), "(7 + (−1)^a)/8");
        assert_eq!(render_qp(&QuasiPolynomial::zero(a())), "0");
    }

    #[test]
    fn first_chamber_text() {
        let f = |x: &[i64]| -> Result<BigRational> {
            let a = x[0];
            Ok(q(a * a, 4) + qi(a) + q(7 + if a % 2 == 0 { 1 } else { -1 }, 8))
        };
        let qp = QuasiPolynomial::fit(ab(), vec![2, 1], 2, Parallelism::Sequential, f).unwrap();
        assert_eq!(render_qp(&qp), "a^2/4 + a + (7 + (−1)^a)/8");
        let g = |x: &[i64]| -> Result<BigRational> { Ok(q(x[1] * x[1] + 3 * x[1] + 2, 2)) };
        let qp = QuasiPolynomial::fit(ab(), vec![1, 1], 2, Parallelism::Sequential, g).unwrap();
        assert_eq!(render_qp(&qp), "b^2/2 + 3*b/2 + 1");
    }

    #[test]
    fn period_three_table() {
        let f = |x: &[i64]| -> Result<BigRational> { Ok(qi(Integer::div_floor(&x[0], &3))) };
        let qp = QuasiPolynomial::fit(a(), vec![3], 1, Parallelism::Sequential, f).unwrap();
        let s = render_qp(&qp);
        assert!(s.starts_with("by (a) mod (3):"), "{s}");
        assert!(s.contains("(2): a/3 − 2/3"), "{s}");
    }

    #[test]
    fn json_round_trip() {
        let f = |x: &[i64]| -> Result<BigRational> { Ok(q(x[0] * x[1], 2) + q(x[0].rem_euclid(2), 3)) };
        let qp = QuasiPolynomial::fit(ab(), vec![2, 1], 2, Parallelism::Sequential, f).unwrap();
        let cs = ConstraintSet::from_constraints([
            CaseConstraint::ge0(AffineForm::new([(0, 1), (1, -1)], 0)),
            CaseConstraint::congruence(AffineForm::var(1), 3, 1),
        ])
        .unwrap();
        let pw = PiecewiseQP::new(
            SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap(),
            Kind::Piecewise,
            ab(),
            vec![Piece { constraints: cs, qp: PieceQP::Dense(qp) }],
        );
        let s = to_json(&pw).unwrap();
        assert!(s.contains("\"version\": \"vpf-1\""));
        assert!(s.contains("\"coeffsByResidue\""));
        let back = from_json(&s).unwrap();
        assert_eq!(to_json(&back).unwrap(), s);
        for x in -5..5 {
            for y in -5..5 {
                assert_eq!(back.eval(&[x, y]).unwrap(), pw.eval(&[x, y]).unwrap());
            }
        }
        assert!(from_json(&s.replace("vpf-1", "vpf-0")).is_err());
        assert!(from_json("{").is_err());
    }
}
