//! Command dispatch for the `affjet` binary. Every command produces one JSON
//! document; [`run`] returns it together with the process exit code.

pub mod expr;

use std::path::{Path, PathBuf};

use affjet::algebra::Scalar;
use affjet::characteristics::{self as ch, FactorBranch};
use affjet::compat::{self, Branch, ConicCoeffs};
use affjet::invariantpde as pde;
use affjet::jetspace::{classify_fiber, jet_of_surface, Region};
use affjet::symmetry::{self as sym, AffineMap3, VectorField3};
use affjet::{affgeom, sample, Error, JetPoint};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::expr::{parse_expr, parse_surface, ExprError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "affjet", version, about = "Jets, affine invariants and the Aff(3)-invariant third-order PDE of surfaces")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Arithmetic for jet evaluation.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Tolerance on float residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Split,
    Pick,
    Compat,
    Char,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorArg {
    First,
    Second,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Jet evaluation.
    Jet {
        #[command(subcommand)]
        cmd: JetCmd,
    },
    /// F, Hessian region, residuals and the Pick invariant at a jet.
    Invariant {
        #[arg(long, conflicts_with_all = ["surface", "at"])]
        jet: Option<PathBuf>,
        #[arg(long, requires = "at")]
        surface: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Infinitesimal symmetries of F.
    Symmetry {
        #[command(subcommand)]
        cmd: SymmetryCmd,
    },
    /// Affine maps acting on surfaces.
    Action {
        #[command(subcommand)]
        cmd: ActionCmd,
    },
    /// Exact identity suites.
    Identities {
        #[command(subcommand)]
        cmd: IdentitiesCmd,
    },
    /// Convex-region system and compatibility conditions along a surface.
    Compat {
        #[command(subcommand)]
        cmd: CompatCmd,
    },
    /// Surfaces cut out by the conic relation in u.
    Conic {
        #[command(subcommand)]
        cmd: ConicCmd,
    },
    /// Characteristic distribution at a hyperbolic jet.
    Characteristics {
        #[arg(long)]
        jet: PathBuf,
        #[arg(long, value_enum, default_value_t = FactorArg::First)]
        branch: FactorArg,
    },
}

#[derive(Subcommand, Debug)]
enum JetCmd {
    Eval {
        #[arg(long)]
        surface: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

#[derive(Subcommand, Debug)]
enum SymmetryCmd {
    Check {
        /// 0-based index into the twelve affine generators.
        #[arg(long, conflicts_with = "field")]
        generator: Option<usize>,
        /// Components "X1;X2;X0" of a vector field, polynomial in x, y, u.
        #[arg(long, allow_hyphen_values = true)]
        field: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum ActionCmd {
    Apply {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        surface: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

#[derive(Subcommand, Debug)]
enum IdentitiesCmd {
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Random jets per sampled identity.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CompatCmd {
    Check {
        #[arg(long)]
        surface: String,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        /// Samples are drawn from the square of this half-width around the origin.
        #[arg(long, default_value = "1/3")]
        radius: String,
    },
}

#[derive(Subcommand, Debug)]
enum ConicCmd {
    Check {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus, allow_hyphen_values = true)]
        branch: BranchArg,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value = "1/3")]
        radius: String,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: String,
    pub detail: String,
}

impl Failure {
    fn usage(error: &str, detail: impl ToString) -> Failure {
        Failure { code: EXIT_USAGE, error: error.into(), detail: detail.to_string() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.error, "detail": self.detail })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let name = format!("{e:?}");
        let code = name.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure { code: EXIT_FAILED, error: code, detail: e.to_string() }
    }
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Failure {
        match e {
            ExprError::Parse { .. } | ExprError::NotPolynomial(_) => Failure::usage("ParseError", e),
            ExprError::Eval { .. } => Failure { code: EXIT_FAILED, error: "EvalError".into(), detail: e.to_string() },
        }
    }
}

/// A report and whether every check in it passed.
pub struct Report {
    pub ok: bool,
    pub body: Value,
}

impl Report {
    fn pass(body: Value) -> Report {
        Report { ok: true, body }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (EXIT_OK, e.to_string());
            }
            return (EXIT_USAGE, pretty(&Failure::usage("UsageError", e.to_string().trim_end()).to_json()));
        }
    };
    let (code, text) = match dispatch(&cli) {
        Ok(r) => (if r.ok { EXIT_OK } else { EXIT_FAILED }, pretty(&r.body)),
        Err(f) => (f.code, pretty(&f.to_json())),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = write_atomic(path, &text) {
            return (EXIT_USAGE, pretty(&Failure::usage("IoError", e).to_json()));
        }
        return (code, String::new());
    }
    (code, text)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage("IoError", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage("ParseError", format!("{}: {e}", path.display())))
}

fn parse_point(at: &str) -> Result<(Scalar, Scalar), Failure> {
    let bad = || Failure::usage("ParseError", format!("expected --at x,y, got '{at}'"));
    let (x, y) = at.split_once(',').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

fn parse_scalar(s: &str) -> Result<Scalar, Failure> {
    s.parse().map_err(|_| Failure::usage("ParseError", format!("bad number '{s}'")))
}

struct Ctx {
    mode: Mode,
    tol: f64,
    seed: u64,
}

impl Ctx {
    fn jet(&self, j: JetPoint) -> JetPoint {
        match self.mode {
            Mode::Exact => j,
            Mode::Float => j.to_float(),
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn surface_jet(&self, surface: &str, at: &str, order: usize) -> Result<JetPoint, Failure> {
        let e = parse_surface(surface)?;
        let (x, y) = parse_point(at)?;
        Ok(self.jet(jet_of_surface(&e.taylor(&x, &y, order)?, order)?))
    }

    fn samples(&self, n: usize, radius: &Scalar) -> Vec<(Scalar, Scalar)> {
        let mut rng = self.rng();
        let mut coord = || {
            let t = Scalar::ratio(rng.gen_range(-96..=96), 96);
            &t * radius
        };
        (0..n).map(|_| (coord(), coord())).collect()
    }
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let ctx = Ctx { mode: cli.mode, tol: cli.tol, seed: cli.seed };
    match &cli.cmd {
        Cmd::Jet { cmd: JetCmd::Eval { surface, at, order } } => {
            let j = ctx.surface_jet(surface, at, *order)?;
            Ok(Report::pass(json!({ "jet": to_value(&j) })))
        }
        Cmd::Invariant { jet, surface, at } => {
            let j = match (jet, surface, at) {
                (Some(path), _, _) => ctx.jet(read_json(path)?),
                (None, Some(s), Some(a)) => ctx.surface_jet(s, a, 3)?,
                _ => return Err(Failure::usage("UsageError", "give --jet FILE or --surface S --at x,y")),
            };
            invariant(&j)
        }
        Cmd::Symmetry { cmd: SymmetryCmd::Check { generator, field } } => symmetry_check(*generator, field.as_deref()),
        Cmd::Action { cmd: ActionCmd::Apply { map, surface, at, order } } => {
            let g: AffineMap3 = read_json(map)?;
            let e = parse_surface(surface)?;
            let (x, y) = parse_point(at)?;
            let f = e.taylor(&x, &y, *order)?;
            let f = if ctx.mode == Mode::Float { f.to_float() } else { f };
            let src = jet_of_surface(&f, *order)?;
            let img = sym::act_on_jet(&g, &f, *order)?;
            let mut body = json!({ "source": to_value(&src), "image": to_value(&img) });
            if *order >= 3 {
                body["F_source"] = to_value(&pde::eval_f(&src)?);
                body["F_image"] = to_value(&pde::eval_f(&img)?);
            }
            if *order >= 2 {
                body["region_source"] = to_value(&classify_fiber(&src)?);
                body["region_image"] = to_value(&classify_fiber(&img)?);
            }
            Ok(Report::pass(body))
        }
        Cmd::Identities { cmd: IdentitiesCmd::Verify { suite, samples } } => identities(&ctx, *suite, *samples),
        Cmd::Compat { cmd: CompatCmd::Check { surface, samples, radius } } => {
            let e = parse_surface(surface)?;
            let pts = ctx.samples(*samples, &parse_scalar(radius)?);
            let float = ctx.mode == Mode::Float;
            let mut eval_err = None;
            let r = compat::surface_check(&pts, |x, y, k| {
                e.taylor(x, y, k).map(|t| if float { t.to_float() } else { t }).map_err(|err| {
                    eval_err = Some(err.clone());
                    Error::Invalid(err.to_string())
                })
            });
            let r = match (r, eval_err) {
                (Ok(r), _) => r,
                (Err(_), Some(err)) => return Err(err.into()),
                (Err(err), None) => return Err(err.into()),
            };
            let compat_max = r
                .per_sample
                .iter()
                .flat_map(|s| s.compat.iter().flatten())
                .map(|v| v.to_f64().abs())
                .fold(0.0, f64::max);
            let ok = r.max_residual <= ctx.tol;
            let mut body = to_value(&r);
            body["ok"] = json!(ok);
            body["max_compat"] = json!(compat_max);
            Ok(Report { ok, body })
        }
        Cmd::Conic { cmd: ConicCmd::Check { coeffs, branch, samples, radius } } => {
            let file: ConicFile = read_json(coeffs)?;
            let pts = match file.samples {
                Some(p) => p.into_iter().map(|[x, y]| (x, y)).collect(),
                None => ctx.samples(*samples, &parse_scalar(radius)?),
            };
            let b = match branch {
                BranchArg::Plus => Branch::Plus,
                BranchArg::Minus => Branch::Minus,
            };
            let r = compat::conic_check(&file.coeffs, b, &pts)?;
            let ok = r.max_residual <= ctx.tol;
            let mut body = to_value(&r);
            body["ok"] = json!(ok);
            Ok(Report { ok, body })
        }
        Cmd::Characteristics { jet, branch } => {
            let j = ctx.jet(read_json(jet)?);
            let b = match branch {
                FactorArg::First => FactorBranch::First,
                FactorArg::Second => FactorBranch::Second,
            };
            characteristics(&j, b)
        }
    }
}

#[derive(Deserialize)]
struct ConicFile {
    #[serde(flatten)]
    coeffs: ConicCoeffs,
    samples: Option<Vec<[Scalar; 2]>>,
}

fn invariant(j: &JetPoint) -> Result<Report, Failure> {
    let det = j.hessian_det();
    let mut body = json!({
        "jet": to_value(j),
        "F": to_value(&pde::eval_f(j)?),
        "det_hess": to_value(&det),
        "region": to_value(&classify_fiber(j)?),
        "residuals": to_value(&pde::residual(j)?.values),
    });
    if !det.is_zero() {
        body["pick"] = to_value(&affgeom::blaschke_and_pick(j)?.pick);
    }
    Ok(Report::pass(body))
}

fn symmetry_check(generator: Option<usize>, field: Option<&str>) -> Result<Report, Failure> {
    let one = |name: Value, x: &VectorField3| -> Result<Value, Failure> {
        let q = match sym::apply_to_f(x) {
            Ok(q) => Some(q),
            Err(Error::NotDivisible) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(json!({
            "field": name,
            "divisible": q.is_some(),
            "quotient": q.map(|q| q.to_string()),
        }))
    };
    let gens = sym::aff3_generators();
    if let Some(text) = field {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != 3 {
            return Err(Failure::usage("ParseError", "--field needs three components X1;X2;X0"));
        }
        let p: Result<Vec<_>, _> = parts.iter().map(|s| parse_expr(s).and_then(|e| e.to_poly())).collect();
        let p = p?;
        let x = VectorField3::new(p[0].clone(), p[1].clone(), p[2].clone());
        let mut r = one(json!(x.to_string()), &x)?;
        let ok = r["divisible"] == json!(true);
        r["ok"] = json!(ok);
        return Ok(Report { ok, body: r });
    }
    if let Some(i) = generator {
        let x = gens.get(i).ok_or_else(|| Failure::usage("UsageError", format!("generator index {i} out of range 0..12")))?;
        let mut r = one(json!(sym::GENERATOR_NAMES[i]), x)?;
        r["generator"] = json!(i);
        let ok = r["divisible"] == json!(true);
        return Ok(Report { ok, body: r });
    }
    let all: Result<Vec<Value>, Failure> = gens
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut r = one(json!(sym::GENERATOR_NAMES[i]), x)?;
            r["generator"] = json!(i);
            Ok(r)
        })
        .collect();
    let all = all?;
    let ok = all.iter().all(|r| r["divisible"] == json!(true));
    Ok(Report { ok, body: json!({ "ok": ok, "generators": all }) })
}

type Check = (&'static str, Result<(), String>);

fn check(name: &'static str, r: affjet::Result<bool>) -> Check {
    match r {
        Ok(true) => (name, Ok(())),
        Ok(false) => (name, Err("identity does not hold".into())),
        Err(e) => (name, Err(e.to_string())),
    }
}

fn split_suite() -> Vec<Check> {
    vec![
        check("riemannian-splitting", Ok(pde::splitting_residual().is_zero())),
        check(
            "minus-factor-product",
            pde::minus_product_quotient().map(|q| q == -affjet::algebra::pv(affjet::Var::UYY).pow(3)),
        ),
    ]
}

fn pick_suite(ctx: &Ctx, n: usize) -> Vec<Check> {
    let mut rng = ctx.rng();
    let sampled = (|| {
        for i in 0..n {
            let region = if i % 2 == 0 { Region::Plus } else { Region::Minus };
            let j = sample::random_jet(&mut rng, 3, Some(region));
            if pde::verify_pick_symbol(&j)?.relative >= 1e-8 {
                return Ok(false);
            }
        }
        Ok(true)
    })();
    vec![
        check("pick-equals-F-plus", pde::pick_f_identity(1).map(|_| true)),
        check("pick-equals-F-minus", pde::pick_f_identity(-1).map(|_| true)),
        check("pick-contraction-is-symbol", sampled),
    ]
}

fn compat_suite() -> Vec<Check> {
    let sys = compat::build_prolonged_system();
    let swapped = {
        let s3 = sys.get(3, 0).expect("solved").map_vars(affjet::Var::swap_xy);
        let e1 = affjet::RatFunc::from(pde::system_plus()[0].clone());
        e1.substitute(affjet::Var::UYYY, &s3).is_zero()
    };
    vec![
        check("cross-derivative-factorizations", compat::cross_residuals(sys).map(|_| true)),
        check("order-five-closure", Ok(sys.consistency.iter().all(|(_, r)| r.is_zero()))),
        check("xy-mirror", Ok(swapped)),
    ]
}

fn char_suite(ctx: &Ctx, n: usize) -> Vec<Check> {
    let unit = affjet::SqrtExt::from(-affjet::algebra::pv(affjet::Var::UYY));
    let quotient = [FactorBranch::First, FactorBranch::Second]
        .iter()
        .map(|b| ch::recover_pde_quotient(*b).map(|q| q == unit))
        .try_fold(true, |acc, r| r.map(|v| acc && v));
    let mut rng = ctx.rng();
    let rank_one = (|| {
        for _ in 0..n {
            let j = sample::random_jet(&mut rng, 3, Some(Region::Minus));
            if j.get(0, 2).is_zero() {
                continue;
            }
            if ch::symbol_rank_one_check(&j, FactorBranch::First)?.residual >= 1e-9 {
                return Ok(false);
            }
        }
        Ok(true)
    })();
    let base = JetPoint::with_hessian(2, Scalar::int(-1), Scalar::zero(), Scalar::int(1));
    let at_base = ch::distribution_v(&base, FactorBranch::First).map(|v| {
        let expect: [[i64; 5]; 3] = [[1, 1, 0, 0, 0], [0, 0, -2, 1, 0], [0, 0, -1, 0, 1]];
        v.iter().zip(expect).all(|(a, e)| a.parallel(&ch::ContactVector::from(e.map(Scalar::int)), 0.0))
    });
    vec![
        check("distribution-determinant-is-factor", quotient),
        check("symbol-rank-one", rank_one),
        check("distribution-at-base-point", at_base),
    ]
}

fn identities(ctx: &Ctx, suite: Suite, n: usize) -> Result<Report, Failure> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::All | Suite::Split) {
        checks.extend(split_suite());
    }
    if matches!(suite, Suite::All | Suite::Pick) {
        checks.extend(pick_suite(ctx, n));
    }
    if matches!(suite, Suite::All | Suite::Compat) {
        checks.extend(compat_suite());
    }
    if matches!(suite, Suite::All | Suite::Char) {
        checks.extend(char_suite(ctx, n));
    }
    let passed: Vec<&str> = checks.iter().filter(|(_, r)| r.is_ok()).map(|(n, _)| *n).collect();
    let failed: Vec<Value> =
        checks.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| json!({ "name": n, "detail": e }))).collect();
    let ok = failed.is_empty();
    Ok(Report { ok, body: json!({ "ok": ok, "identities": passed, "failed": failed }) })
}

fn characteristics(j: &JetPoint, branch: FactorBranch) -> Result<Report, Failure> {
    let v = ch::distribution_v(j, branch)?;
    let eqs: Result<Vec<_>, _> = v.iter().map(|w| ch::char_var_equations(j, branch, w)).collect();
    let mut body = json!({
        "region": to_value(&classify_fiber(j)?),
        "branch": to_value(&branch),
        "distribution": to_value(&v),
        "defining_equations": to_value(&eqs?),
    });
    if j.order() >= 3 {
        let on = ch::on_equation(j, branch)?;
        body["on_equation"] = json!(on);
        body["determinant"] = to_value(&ch::recover_pde(j, &j.third(), branch)?);
        if on {
            body["char_line"] = to_value(&ch::char_line(j, branch)?);
        }
        if !j.get(0, 2).is_zero() {
            body["symbol"] = to_value(&ch::symbol_rank_one_check(j, branch)?);
        }
    }
    Ok(Report::pass(body))
}
