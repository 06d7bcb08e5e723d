//! The `vpf` commands, callable in-process.
//!
//! [`run`] parses an argument list and returns what the binary would print
//! together with its exit code. Nothing is written to stdout before a
//! command has fully succeeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpf_core::engine::system::SystemMatrix;
use vpf_core::engine::{self, EliminationOrder, EngineOptions};
use vpf_core::oracle::{self, brute_table, DEFAULT_STATE_LIMIT};
use vpf_core::quasipoly::{render_text, to_json, PiecewiseQP};
use vpf_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "vpf", version, about = "Vector partition functions and Ehrhart quasi-polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Symbolic,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Auto,
    Paper,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of nonnegative integer solutions of A x = b.
    Count {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated right-hand side.
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        #[arg(long, value_enum, default_value = "symbolic")]
        method: Method,
    },
    /// Ehrhart quasi-polynomial t -> #{x >= 0 : A x = t b}.
    Ehrhart {
        #[arg(long, requires = "rhs", conflicts_with = "polytope")]
        matrix: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        rhs: Option<String>,
        /// Inequalities `a1 ... ad <= b`, one per line.
        #[arg(long)]
        polytope: Option<PathBuf>,
        /// Do not add x >= 0 to a polytope file.
        #[arg(long)]
        no_orthant: bool,
        /// Also write the "vpf-1" JSON document here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Piecewise quasi-polynomial of the counting function over b.
    Symbolic {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        order: Order,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Cross-checks the symbolic answer against brute force.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_rhs: i64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a command printed and how it exited.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Failure of a command, already mapped to an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Report printed before the failure (only for mismatches).
    pub stdout: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Malformed(_)
            | Error::ZeroColumn(_)
            | Error::NegativeEntry { .. }
            | Error::DimensionMismatch { .. }
            | Error::Unbounded(_)
            | Error::EmptyPolytope => EXIT_MALFORMED,
            Error::Resummation { .. } | Error::PieceDisagreement { .. } => EXIT_MISMATCH,
            Error::ResourceLimit(_) => EXIT_RESOURCE,
            _ => 1,
        };
        Failure { code, message: e.to_string(), stdout: String::new() }
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_MALFORMED, message: msg.into(), stdout: String::new() }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<SystemMatrix, Failure> {
    Ok(SystemMatrix::parse(&read(path)?)?)
}

pub fn parse_rhs(s: &str, m: usize) -> Result<Vec<i64>, Failure> {
    let b: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| malformed(format!("bad right-hand side entry {x:?}"))))
        .collect::<Result<_, _>>()?;
    if b.len() != m {
        return Err(malformed(format!("right-hand side has {} entries, the matrix has {m} rows", b.len())));
    }
    Ok(b)
}

fn write_json(path: &Path, pw: &PiecewiseQP) -> Result<(), Failure> {
    let s = to_json(pw)?;
    std::fs::write(path, s).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()), stdout: String::new() })
}

fn options(order: Order) -> EngineOptions {
    EngineOptions {
        order: match order {
            Order::Auto => EliminationOrder::Auto,
            Order::Paper => EliminationOrder::Paper,
        },
        ..Default::default()
    }
}

pub fn cmd_count(matrix: &Path, rhs: &str, method: Method) -> Result<String, Failure> {
    let a = read_matrix(matrix)?;
    let b = parse_rhs(rhs, a.m())?;
    let symbolic = || -> Result<BigInt, Failure> {
        let v = engine::count(&a, &b, &EngineOptions::default())?;
        if !v.is_integer() {
            return Err(Failure { code: EXIT_MISMATCH, message: format!("non-integral count {v}"), stdout: String::new() });
        }
        Ok(v.to_integer())
    };
    let brute = || -> Result<BigInt, Failure> { Ok(BigInt::from(oracle::brute_count(&a, &b)?)) };
    match method {
        Method::Symbolic => Ok(format!("{}\n", symbolic()?)),
        Method::Oracle => Ok(format!("{}\n", brute()?)),
        Method::Both => {
            let (s, o) = (symbolic()?, brute()?);
            let report = format!("symbolic: {s}\noracle: {o}\n");
            if s != o {
                return Err(Failure { code: EXIT_MISMATCH, message: format!("mismatch at b = {b:?}"), stdout: report });
            }
            Ok(report)
        }
    }
}

pub fn cmd_ehrhart(
    matrix: Option<&Path>,
    rhs: Option<&str>,
    polytope: Option<&Path>,
    orthant: bool,
    json: Option<&Path>,
) -> Result<String, Failure> {
    let (a, b) = match (matrix, rhs, polytope) {
        (Some(m), Some(r), None) => {
            let a = read_matrix(m)?;
            let b = parse_rhs(r, a.m())?;
            (a, b)
        }
        (None, None, Some(p)) => {
            let ineqs = oracle::parse_polytope(&read(p)?)?;
            let sf = oracle::polytope_to_standard_form(&ineqs, orthant)?;
            (sf.matrix, sf.rhs)
        }
        _ => return Err(malformed("give either --matrix with --rhs, or --polytope")),
    };
    let c = engine::ehrhart(&a, &b, &EngineOptions::default())?;
    if let Some(path) = json {
        write_json(path, &c.result)?;
    }
    let qp = &c.result.pieces[0].qp;
    let mut out = String::new();
    writeln!(out, "L(t) = {}", render_text(&c.result)).unwrap();
    let period: Vec<String> = qp.period().iter().map(|p| p.to_string()).collect();
    writeln!(out, "degree {}, period {}", qp.degree(), period.join(",")).unwrap();
    Ok(out)
}

pub fn cmd_symbolic(matrix: &Path, order: Order, json: Option<&Path>) -> Result<String, Failure> {
    let a = read_matrix(matrix)?;
    let c = engine::symbolic(&a, &options(order))?;
    if let Some(path) = json {
        write_json(path, &c.result)?;
    }
    let mut out = render_text(&c.result);
    out.push('\n');
    Ok(out)
}

/// Ranks failing points by the size of their entries, then lexicographically.
fn smaller(a: &[i64], b: &[i64]) -> bool {
    let s = |x: &[i64]| x.iter().map(|v| v.abs()).sum::<i64>();
    (s(a), a) < (s(b), b)
}

struct Check {
    name: &'static str,
    cases: usize,
    witness: Option<String>,
}

pub fn cmd_verify(matrix: &Path, max_rhs: i64, samples: usize, seed: u64) -> Result<String, Failure> {
    let a = read_matrix(matrix)?;
    if max_rhs < 0 {
        return Err(malformed("--max-rhs must be nonnegative"));
    }
    let m = a.m();
    let c = engine::symbolic(&a, &EngineOptions { seed, ..Default::default() })?;
    let pw = &c.result;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<i64>> = (0..samples).map(|_| (0..m).map(|_| rng.random_range(0..=max_rhs)).collect()).collect();
    let table = if samples > 0 { Some(brute_table(&a, &vec![max_rhs; m], DEFAULT_STATE_LIMIT)?) } else { None };

    let mut oracle_check = Check { name: "oracle agreement", cases: 0, witness: None };
    let mut overlap_check = Check { name: "overlap agreement", cases: 0, witness: None };
    let mut best: Option<Vec<i64>> = None;
    let mut best_overlap: Option<(Vec<i64>, String)> = None;
    for b in &points {
        oracle_check.cases += 1;
        overlap_check.cases += 1;
        let want = BigRational::from_integer(table.as_ref().expect("table").get(b).into());
        match pw.eval(b) {
            Ok(v) if v == want => {}
            Ok(v) => {
                if best.as_ref().is_none_or(|w| smaller(b, w)) {
                    best = Some(b.clone());
                    oracle_check.witness = Some(format!("b = {b:?}: symbolic {v}, oracle {want}"));
                }
            }
            Err(Error::PieceDisagreement { detail, .. }) => {
                if best_overlap.as_ref().is_none_or(|(w, _)| smaller(b, w)) {
                    best_overlap = Some((b.clone(), detail));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some((b, detail)) = best_overlap {
        overlap_check.witness = Some(format!("b = {b:?}: {detail}"));
    }

    let bound = pw.expected_degree();
    let mut degree_check = Check { name: "degree bound", cases: pw.pieces.len(), witness: None };
    if let Some((i, p)) = pw.pieces.iter().enumerate().find(|(_, p)| p.qp.degree() > bound) {
        degree_check.witness = Some(format!("piece {} has degree {} > d - rank = {bound}", i + 1, p.qp.degree()));
    }

    let mut pairing_check = Check { name: "reciprocity pairing", cases: 0, witness: None };
    if samples > 0 {
        for i in 0..pw.pieces.len() {
            pairing_check.cases += 1;
            let own: Vec<Vec<i64>> = points.iter().filter(|b| pw.pieces[i].constraints.holds(b).unwrap_or(false)).cloned().collect();
            let pts = if own.is_empty() { points.clone() } else { own };
            if pw.reciprocity_partner(i, &pts)?.is_none() {
                pairing_check.witness = Some(format!("piece {} has no partner under b -> -b - r", i + 1));
                break;
            }
        }
    }

    let checks = [oracle_check, degree_check, pairing_check, overlap_check];
    let mut out = String::new();
    writeln!(out, "{:<22} {:>6}  result", "check", "cases").unwrap();
    for ch in &checks {
        let verdict = if ch.witness.is_some() { "FAIL" } else { "pass" };
        writeln!(out, "{:<22} {:>6}  {verdict}", ch.name, ch.cases).unwrap();
    }
    let failures: Vec<&Check> = checks.iter().filter(|c| c.witness.is_some()).collect();
    if failures.is_empty() {
        writeln!(out, "all checks passed").unwrap();
        return Ok(out);
    }
    for f in &failures {
        writeln!(out, "witness ({}): {}", f.name, f.witness.as_deref().unwrap_or("")).unwrap();
    }
    Err(Failure { code: EXIT_MISMATCH, message: format!("{} check(s) failed", failures.len()), stdout: out })
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Count { matrix, rhs, method } => cmd_count(&matrix, &rhs, method),
        Command::Ehrhart { matrix, rhs, polytope, no_orthant, json } => cmd_ehrhart(
            matrix.as_deref(),
            rhs.as_deref(),
            polytope.as_deref(),
            !no_orthant,
            json.as_deref(),
        ),
        Command::Symbolic { matrix, order, json } => cmd_symbolic(&matrix, order, json.as_deref()),
        Command::Verify { matrix, max_rhs, samples, seed } => cmd_verify(&matrix, max_rhs, samples, seed),
    }
}

/// Runs `vpf` on an argument list (including the program name).
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Output { stdout: text, stderr: String::new(), code }
            } else {
                Output { stdout: String::new(), stderr: text, code: EXIT_MALFORMED }
            };
        }
    };
    match dispatch(cli) {
        Ok(stdout) => Output { stdout, stderr: String::new(), code: EXIT_OK },
        Err(f) => Output { stdout: f.stdout, stderr: format!("vpf: {}\n", f.message), code: f.code },
    }
}
