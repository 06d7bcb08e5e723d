use std::fmt;

use num_integer::Integer;

use crate::arith::affine::param_name;
use crate::arith::AffineForm;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    /// `form >= 0`
    SignGE0,
    /// `form <= -1`
    SignLEminus1,
    /// `form = residue (mod modulus)`
    Congruence { modulus: i64, residue: i64 },
}

/// A sign or congruence condition on the integer parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseConstraint {
    pub kind: ConstraintKind,
    pub form: AffineForm,
}

/// Outcome of canonicalizing a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Canonical {
    Always,
    Never,
    Keep(CaseConstraint),
}

impl CaseConstraint {
    pub fn ge0(form: AffineForm) -> Self {
        CaseConstraint { kind: ConstraintKind::SignGE0, form }
    }

    pub fn le_minus1(form: AffineForm) -> Self {
        CaseConstraint { kind: ConstraintKind::SignLEminus1, form }
    }

    pub fn congruence(form: AffineForm, modulus: i64, residue: i64) -> Self {
        assert!(modulus > 0);
        CaseConstraint { kind: ConstraintKind::Congruence { modulus, residue: residue.mod_floor(&modulus) }, form }
    }

    pub fn holds(&self, b: &[i64]) -> Result<bool> {
        let v = self.form.eval(b)?;
        Ok(match self.kind {
            ConstraintKind::SignGE0 => v >= 0,
            ConstraintKind::SignLEminus1 => v <= -1,
            ConstraintKind::Congruence { modulus, residue } => v.mod_floor(&modulus) == residue,
        })
    }

    pub fn is_sign(&self) -> bool {
        !matches!(self.kind, ConstraintKind::Congruence { .. })
    }

    /// Normal form: sign constraints become `g >= 0` with primitive linear
    /// part and tightened constant; congruences get coefficients reduced
    /// into `[0, modulus)`, the constant moved into the residue, and common
    /// factors with the modulus divided out. Constant constraints are
    /// decided.
    pub fn canonical(&self) -> Canonical {
        match self.kind {
            ConstraintKind::SignGE0 | ConstraintKind::SignLEminus1 => {
                let f = match self.kind {
                    ConstraintKind::SignGE0 => self.form.clone(),
                    _ => self.form.scale(-1).shift(-1),
                };
                if f.is_constant() {
                    return if f.constant_term() >= 0 { Canonical::Always } else { Canonical::Never };
                }
                let g = f.content();
                let lin = f.linear_part();
                let lin = AffineForm::new(lin.coeffs().iter().map(|&(i, c)| (i, c / g)), 0);
                Canonical::Keep(CaseConstraint::ge0(lin.shift(Integer::div_floor(&f.constant_term(), &g))))
            }
            ConstraintKind::Congruence { modulus, residue } => {
                let mut m = modulus;
                let mut r = (residue - self.form.constant_term()).mod_floor(&m);
                let mut coeffs: Vec<(usize, i64)> =
                    self.form.coeffs().iter().map(|&(i, c)| (i, c.mod_floor(&m))).filter(|&(_, c)| c != 0).collect();
                let g = coeffs.iter().fold(m, |acc, &(_, c)| acc.gcd(&c));
                if r % g != 0 {
                    return Canonical::Never;
                }
                if g > 1 {
                    m /= g;
                    r /= g;
                    for c in coeffs.iter_mut() {
                        c.1 /= g;
                    }
                }
                if m == 1 {
                    return Canonical::Always;
                }
                // Scale so the leading coefficient is the smallest
                // representative of its orbit under units mod m; this keeps
                // equivalent congruences equal without a full normal form.
                if let Some(&(_, lead)) = coeffs.first() {
                    if lead.gcd(&m) == 1 {
                        let inv = mod_inverse(lead, m);
                        for c in coeffs.iter_mut() {
                            c.1 = (c.1 as i128 * inv as i128).rem_euclid(m as i128) as i64;
                        }
                        r = (r as i128 * inv as i128).rem_euclid(m as i128) as i64;
                    }
                }
                Canonical::Keep(CaseConstraint::congruence(AffineForm::new(coeffs, 0), m, r))
            }
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        match &self.kind {
            ConstraintKind::SignGE0 => render_relation(&self.form, "≥", 0, names),
            ConstraintKind::SignLEminus1 => render_relation(&self.form, "≤", -1, names),
            ConstraintKind::Congruence { modulus, residue } => {
                format!("{} ≡ {residue} (mod {modulus})", self.form.render(names))
            }
        }
    }
}

/// Renders `form REL k` as `lhs REL rhs` with positive coefficients on
/// both sides, e.g. `2*b ≥ a`.
fn render_relation(form: &AffineForm, rel: &str, k: i64, names: &[String]) -> String {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &(i, c) in form.coeffs() {
        if c > 0 {
            lhs.push((i, c));
        } else {
            rhs.push((i, -c));
        }
    }
    let c = form.constant_term() - k;
    let side = |terms: &[(usize, i64)], constant: i64| -> String {
        let mut parts: Vec<String> = terms
            .iter()
            .map(|&(i, c)| if c == 1 { param_name(names, i) } else { format!("{c}*{}", param_name(names, i)) })
            .collect();
        if constant != 0 || parts.is_empty() {
            parts.push(constant.to_string());
        }
        parts.join(" + ")
    };
    let (lc, rc) = if c >= 0 { (c, 0) } else { (0, -c) };
    if lhs.is_empty() && !rhs.is_empty() {
        // keep the parameter side on the left: "a ≤ 3" instead of "3 ≥ a"
        let flipped = match rel {
            "≥" => "≤",
            _ => "≥",
        };
        return format!("{} {flipped} {}", side(&rhs, rc), side(&lhs, lc));
    }
    format!("{} {rel} {}", side(&lhs, lc), side(&rhs, rc))
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let e = (a as i128).extended_gcd(&(m as i128));
    e.x.rem_euclid(m as i128) as i64
}

impl fmt::Display for CaseConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&[]))
    }
}

/// A sorted, duplicate-free conjunction of canonical constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintSet {
    items: Vec<CaseConstraint>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet { items: Vec::new() }
    }

    /// Builds a set; `None` if some constraint is constant-false.
    pub fn from_constraints(cs: impl IntoIterator<Item = CaseConstraint>) -> Option<Self> {
        let mut s = ConstraintSet::new();
        for c in cs {
            s = s.with(c)?;
        }
        Some(s)
    }

    /// Adds a constraint; `None` if the result is trivially contradictory.
    pub fn with(&self, c: CaseConstraint) -> Option<Self> {
        match c.canonical() {
            Canonical::Always => Some(self.clone()),
            Canonical::Never => None,
            Canonical::Keep(c) => {
                let mut items = self.items.clone();
                match items.binary_search(&c) {
                    Ok(_) => {}
                    Err(pos) => {
                        if let ConstraintKind::Congruence { modulus, residue } = c.kind {
                            let clash = items.iter().any(|o| {
                                o.form == c.form
                                    && matches!(o.kind, ConstraintKind::Congruence { modulus: m2, residue: r2 } if m2 == modulus && r2 != residue)
                            });
                            if clash {
                                return None;
                            }
                        }
                        items.insert(pos, c)
                    }
                }
                Some(ConstraintSet { items })
            }
        }
    }

    pub fn items(&self) -> &[CaseConstraint] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn holds(&self, b: &[i64]) -> Result<bool> {
        for c in &self.items {
            if !c.holds(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn signs(&self) -> impl Iterator<Item = &CaseConstraint> {
        self.items.iter().filter(|c| c.is_sign())
    }

    pub fn congruences(&self) -> impl Iterator<Item = &CaseConstraint> {
        self.items.iter().filter(|c| !c.is_sign())
    }

    /// Cheap satisfiability probe: searches the box `[-radius, radius]^n`
    /// for a witness, giving up (and answering `None`) past `budget` points.
    pub fn probe(&self, nparams: usize, radius: i64, budget: usize) -> Option<bool> {
        let mut b = vec![-radius; nparams];
        let mut seen = 0usize;
        loop {
            if self.holds(&b).unwrap_or(false) {
                return Some(true);
            }
            seen += 1;
            if seen >= budget {
                return None;
            }
            let mut i = 0;
            loop {
                if i == nparams {
                    return Some(false);
                }
                b[i] += 1;
                if b[i] <= radius {
                    break;
                }
                b[i] = -radius;
                i += 1;
            }
        }
    }

    /// Substitutes `b := subs(b')`; `None` if a constraint becomes
    /// constant-false.
    pub fn compose(&self, subs: &[AffineForm]) -> Option<Self> {
        ConstraintSet::from_constraints(
            self.items.iter().map(|c| CaseConstraint { kind: c.kind.clone(), form: c.form.compose(subs) }),
        )
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.items.is_empty() {
            return "true".into();
        }
        self.items.iter().map(|c| c.render(names)).collect::<Vec<_>>().join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn sign_canonical_tightens() {
        // 2a - 4b + 3 >= 0  <=>  a - 2b + 1 >= 0
        let c = CaseConstraint::ge0(AffineForm::new([(0, 2), (1, -4)], 3));
        assert_eq!(c.canonical(), Canonical::Keep(CaseConstraint::ge0(AffineForm::new([(0, 1), (1, -2)], 1))));
        // b - a + 1 <= -1  <=>  a - b - 2 >= 0
        let c = CaseConstraint::le_minus1(AffineForm::new([(1, 1), (0, -1)], 1));
        assert_eq!(c.canonical(), Canonical::Keep(CaseConstraint::ge0(AffineForm::new([(0, 1), (1, -1)], -2))));
        assert_eq!(CaseConstraint::ge0(AffineForm::constant(-1)).canonical(), Canonical::Never);
        assert_eq!(CaseConstraint::le_minus1(AffineForm::constant(-1)).canonical(), Canonical::Always);
    }

    #[test]
    fn canonical_preserves_truth() {
        let cs = [
            CaseConstraint::ge0(AffineForm::new([(0, 6), (1, -4)], 3)),
            CaseConstraint::le_minus1(AffineForm::new([(0, -3), (1, 9)], 2)),
            CaseConstraint::congruence(AffineForm::new([(0, 4), (1, 6)], 3), 10, 7),
            CaseConstraint::congruence(AffineForm::new([(0, 3), (1, -1)], 1), 4, 2),
        ];
        for c in &cs {
            for a in -12..12 {
                for b in -12..12 {
                    let want = c.holds(&[a, b]).unwrap();
                    let got = match c.canonical() {
                        Canonical::Always => true,
                        Canonical::Never => false,
                        Canonical::Keep(k) => k.holds(&[a, b]).unwrap(),
                    };
                    assert_eq!(want, got, "{c} at {a},{b}");
                }
            }
        }
    }

    #[test]
    fn impossible_congruence() {
        let c = CaseConstraint::congruence(AffineForm::new([(0, 2)], 0), 4, 1);
        assert_eq!(c.canonical(), Canonical::Never);
    }

    #[test]
    fn set_detects_clash_and_dedups() {
        let f = AffineForm::new([(0, 1)], 0);
        let s = ConstraintSet::from_constraints([
            CaseConstraint::congruence(f.clone(), 2, 0),
            CaseConstraint::congruence(f.clone(), 2, 0),
        ])
        .unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.with(CaseConstraint::congruence(f, 2, 1)).is_none());
        assert_eq!(s.probe(2, 3, 1000), Some(true));
    }

    #[test]
    fn rendering() {
        let n = names();
        assert_eq!(CaseConstraint::ge0(AffineForm::new([(1, 2), (0, -1)], 0)).render(&n), "2*b ≥ a");
        assert_eq!(CaseConstraint::ge0(AffineForm::new([(0, 1), (1, -1)], 1)).render(&n), "a + 1 ≥ b");
        assert_eq!(CaseConstraint::ge0(AffineForm::new([(0, -1)], 3)).render(&n), "a ≤ 3");
        assert_eq!(
            CaseConstraint::congruence(AffineForm::new([(0, 1)], 0), 2, 1).render(&n),
            "a ≡ 1 (mod 2)"
        );
    }
}
