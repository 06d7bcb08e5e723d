//! Iterated partial-fraction elimination.
//!
//! `phi_A(b)` is the constant term of `1/(prod_k (1 - z^{c_k}) z^b)`. Each
//! stage removes one variable and leaves a guarded sum: a list of terms
//! that contribute only where their guards hold. After all but one
//! variable are gone, the last constant term is a sum of denumerants.

pub mod cells;
pub mod constraint;
pub mod eliminate;
pub mod pieces;
pub mod system;
pub mod verify;

use std::collections::BTreeMap;

use crate::arith::{AffineForm, FactorAtom, GFExpression, GFTerm, ParamPoly, RatAffine};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::univar::{final_terms, DenumerantCache, FinalTerm, FinalVerifier};
use constraint::ConstraintSet;
use eliminate::{active_vars, eliminate_guarded, eliminate_term, merge_terms, section_cost, GuardedTerm};
use system::SystemMatrix;
use verify::{StageCheck, StageVerifier};

pub use pieces::{count, ehrhart, symbolic, Computation};

/// How the right-hand side enters the generating function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parameterization {
    /// `b` itself is the parameter vector.
    SymbolicB,
    /// `b = t * b0` with the single parameter `t`.
    Dilation(Vec<i64>),
}

impl Parameterization {
    pub fn nparams(&self, m: usize) -> usize {
        match self {
            Parameterization::SymbolicB => m,
            Parameterization::Dilation(_) => 1,
        }
    }

    /// `b_i` as an affine form in the parameters.
    pub fn rhs_form(&self, i: usize) -> AffineForm {
        match self {
            Parameterization::SymbolicB => AffineForm::var(i),
            Parameterization::Dilation(b0) => AffineForm::new([(0, b0[i])], 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    /// Cheapest variable first (fewest factors involving it, then degree).
    #[default]
    Auto,
    /// Last variable first, keeping `z_1` for the final step; reproduces
    /// the worked example's intermediate expression.
    Paper,
    /// Explicit order of the variables to eliminate; the remaining one is
    /// handled by the final step.
    Fixed(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub order: EliminationOrder,
    pub parallelism: Parallelism,
    /// Re-summation checks of every stage.
    pub verify: bool,
    pub samples: usize,
    pub seed: u64,
    /// Abort when a stage produces more guarded terms than this.
    pub max_terms: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            order: EliminationOrder::Auto,
            parallelism: Parallelism::default(),
            verify: true,
            samples: 20,
            seed: 0x5eed,
            max_terms: 5_000_000,
        }
    }
}

/// Additive case tree: at a parameter point the value is the sum of the
/// payloads of the leaves whose constraints hold.
#[derive(Clone, Debug, Default)]
pub struct CaseTree<T> {
    pub leaves: Vec<(ConstraintSet, T)>,
}

impl CaseTree<GFExpression> {
    fn from_guarded(terms: Vec<GuardedTerm>) -> Self {
        let mut groups: BTreeMap<ConstraintSet, Vec<GFTerm>> = BTreeMap::new();
        for t in terms {
            groups.entry(t.guards).or_default().push(t.term);
        }
        CaseTree { leaves: groups.into_iter().map(|(g, ts)| (g, GFExpression::new(ts))).collect() }
    }

    pub fn guarded_terms(&self) -> Vec<GuardedTerm> {
        self.leaves
            .iter()
            .flat_map(|(g, e)| e.terms.iter().map(|t| GuardedTerm { guards: g.clone(), term: t.clone() }))
            .collect()
    }
}

/// `1/(prod_k (1 - z^{c_k}) z^b)` with `b` given by the parameterization.
pub fn euler_gf(a: &SystemMatrix, param: &Parameterization) -> GFExpression {
    let n = param.nparams(a.m());
    let exps = (0..a.m()).map(|i| RatAffine::integral(param.rhs_form(i).scale(-1))).collect();
    let den = a.columns().into_iter().map(|c| FactorAtom::binomial(c, 1)).collect();
    GFExpression::new(vec![GFTerm::new(ParamPoly::one(n), exps, den)])
}

/// Constant term in `z_var` of a whole expression under a context.
pub fn eliminate_variable(expr: &GFExpression, var: usize, context: &ConstraintSet) -> Result<CaseTree<GFExpression>> {
    let terms: Vec<GuardedTerm> =
        expr.terms.iter().map(|t| GuardedTerm { guards: context.clone(), term: t.clone() }).collect();
    Ok(CaseTree::from_guarded(eliminate_guarded(&terms, var, Parallelism::Sequential)?))
}

/// Constant term in `z_var` of one term: the analytic parts of its partial
/// fraction expansion evaluated at `z_var = 0`.
pub fn pf_decompose(term: &GFTerm, var: usize, context: &ConstraintSet) -> Result<CaseTree<GFExpression>> {
    let gt = GuardedTerm { guards: context.clone(), term: term.clone() };
    Ok(CaseTree::from_guarded(merge_terms(eliminate_term(&gt, var)?)))
}

#[derive(Clone, Debug, Default)]
pub struct StageReport {
    pub var: usize,
    pub terms_in: usize,
    pub terms_out: usize,
    pub check: Option<StageCheck>,
}

#[derive(Clone, Debug, Default)]
pub struct EliminationReport {
    pub stages: Vec<StageReport>,
    pub final_terms: usize,
    pub final_checked: usize,
}

/// Everything left after elimination: a guarded sum of denumerants.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub nparams: usize,
    /// Guarded terms in the last variable only.
    pub univariate: CaseTree<GFExpression>,
    pub terms: Vec<FinalTerm>,
    pub report: EliminationReport,
}

impl Elimination {
    /// `phi` at `b` as the guarded sum.
    pub fn eval(&self, b: &[i64]) -> Result<num_rational::BigRational> {
        let mut s = num_rational::BigRational::from_integer(0.into());
        for t in &self.terms {
            s += t.value(b)?;
        }
        Ok(s)
    }
}

fn verification_range(param: &Parameterization) -> (i64, i64) {
    match param {
        Parameterization::SymbolicB => (-6, 30),
        Parameterization::Dilation(_) => (-4, 12),
    }
}

/// Variable to eliminate next from one term under a fixed order, or `None`
/// if the term is ready for the final step.
fn choose_fixed(term: &GFTerm, fixed: &[usize]) -> Option<usize> {
    let active = active_vars(term);
    if active.len() <= 1 {
        return None;
    }
    fixed.iter().copied().find(|v| active.contains(v)).or(Some(active[0]))
}

/// Terms at or below this count get a lookahead cost per candidate.
const LOOKAHEAD_TERMS: usize = 16;

/// The variable every pending term eliminates next under the automatic
/// order: the cheapest in total over the terms that involve it.
///
/// The choice must be shared. A stage treats the eliminated variable as the
/// smallest of the iterated Laurent field, which fixes how each mixed-sign
/// factor expands; terms from one source taking different routes would mix
/// incompatible expansions and lose the cancellations between them.
fn choose_stage_var(pending: &[GuardedTerm], mode: Parallelism) -> Result<Option<usize>> {
    let mut candidates: Vec<usize> = pending.iter().flat_map(|t| active_vars(&t.term)).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let look = pending.len() <= LOOKAHEAD_TERMS;
    let costs = par::try_map(mode, &candidates, |&v| -> Result<u128> {
        let mut total: u128 = 0;
        for t in pending {
            let active = active_vars(&t.term);
            if !active.contains(&v) {
                continue;
            }
            let c = if look && active.len() > 2 { lookahead_cost(&t.term, v)? } else { section_cost(&t.term, v)? };
            total = total.saturating_add(c);
        }
        Ok(total)
    })?;
    Ok(candidates.into_iter().zip(costs).min_by_key(|&(v, c)| (c, v)).map(|(v, _)| v))
}

/// Above this predicted size a candidate is not trial-eliminated.
const LOOKAHEAD_CAP: u128 = 50_000;

/// Size of eliminating `v` plus the cheapest next step of every output;
/// a greedy choice can look cheap and leave huge exponents behind.
fn lookahead_cost(term: &GFTerm, v: usize) -> Result<u128> {
    let now = section_cost(term, v)?;
    if now > LOOKAHEAD_CAP {
        return Ok(now.saturating_mul(LOOKAHEAD_CAP));
    }
    let gt = GuardedTerm { guards: ConstraintSet::new(), term: term.clone() };
    let out = eliminate_term(&gt, v)?;
    let mut total = out.len() as u128;
    for o in &out {
        let act = active_vars(&o.term);
        if act.len() <= 1 {
            continue;
        }
        let mut cheapest = u128::MAX;
        for &y in &act {
            cheapest = cheapest.min(section_cost(&o.term, y)?);
        }
        total = total.saturating_add(cheapest);
    }
    Ok(total)
}

/// Eliminates variables until every term involves at most one, then
/// converts the last constant terms to denumerants. The automatic order
/// picks one variable per stage for all terms; different terms may still
/// end in different variables. `a` must have full row rank.
pub fn run_elimination(a: &SystemMatrix, param: &Parameterization, opts: &EngineOptions) -> Result<Elimination> {
    let m = a.m();
    let nparams = param.nparams(m);
    let fixed: Vec<usize> = match &opts.order {
        EliminationOrder::Paper => (1..m).rev().collect(),
        EliminationOrder::Fixed(o) => {
            let mut seen = o.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != m - 1 || o.len() != m - 1 || seen.iter().any(|&v| v >= m) {
                return Err(Error::Malformed(format!("elimination order must name {} distinct variables", m - 1)));
            }
            o.clone()
        }
        EliminationOrder::Auto => Vec::new(),
    };
    let mut terms = vec![GuardedTerm { guards: ConstraintSet::new(), term: euler_gf(a, param).terms[0].clone() }];
    let mut report = EliminationReport::default();
    for round in 0..m {
        let mut ready = Vec::new();
        let mut groups: BTreeMap<usize, Vec<GuardedTerm>> = BTreeMap::new();
        if opts.order == EliminationOrder::Auto {
            let (pending, done): (Vec<GuardedTerm>, Vec<GuardedTerm>) =
                terms.into_iter().partition(|t| active_vars(&t.term).len() > 1);
            ready = done;
            if let Some(x) = choose_stage_var(&pending, opts.parallelism)? {
                // terms free of x pass through: their constant term in x is themselves
                let (with_x, without): (Vec<GuardedTerm>, Vec<GuardedTerm>) =
                    pending.into_iter().partition(|t| active_vars(&t.term).contains(&x));
                ready.extend(without);
                groups.insert(x, with_x);
            }
        } else {
            for t in terms {
                match choose_fixed(&t.term, &fixed) {
                    Some(x) => groups.entry(x).or_default().push(t),
                    None => ready.push(t),
                }
            }
        }
        if groups.is_empty() {
            terms = ready;
            break;
        }
        let verifier = StageVerifier {
            samples: opts.samples,
            seed: opts.seed.wrapping_add(round as u64),
            param_range: verification_range(param),
        };
        for (x, src) in groups {
            let out = eliminate_guarded(&src, x, opts.parallelism)?;
            if out.len() > opts.max_terms {
                return Err(Error::ResourceLimit(format!("{} guarded terms after eliminating z{}", out.len(), x + 1)));
            }
            let check =
                if opts.verify { Some(verifier.verify(&src, &out, x, nparams, opts.parallelism)?) } else { None };
            report.stages.push(StageReport { var: x, terms_in: src.len(), terms_out: out.len(), check });
            ready.extend(out);
        }
        terms = merge_terms(ready);
    }
    let mut cache = DenumerantCache::default();
    let fts = final_terms(&terms, &mut cache, opts.parallelism)?;
    report.final_terms = fts.len();
    if opts.verify {
        let fv = FinalVerifier { samples: opts.samples, seed: opts.seed, param_range: verification_range(param) };
        report.final_checked = fv.verify(&terms, &fts, nparams)?;
    }
    Ok(Elimination { nparams, univariate: CaseTree::from_guarded(terms), terms: fts, report })
}
