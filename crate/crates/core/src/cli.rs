//! Command-line front end.
//!
//! Exit codes: 0 positive verdict (or success), 1 negative verdict,
//! 2 configuration error, 3 evaluation error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};

use crate::arithmetic::{pd_check_grid, ArithmeticFunction, Builtin};
use crate::error::Error;
use crate::export;
use crate::meet_matrix::{kron_decompose_d, meet_matrix, reconstruct, LatticeFunction};
use crate::pd::{pd_criterion, psd_oracle, PdVerdict};
use crate::poset::{parse_hasse, ElementSubset, LatticeFamily};
use crate::Rational;

#[derive(Parser, Debug)]
#[command(name = "meetpd", version, about = "Meet matrices and positive definite functions on meet semilattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the meet matrix of f over the covering set.
    Matrix(RunArgs),
    /// Decide positive definiteness on the covering set; prints a verdict.
    Check(RunArgs),
    /// Write the Kronecker-factored decomposition of the meet matrix.
    Decompose(RunArgs),
    /// Tabulate f = Σ_{z <= x} g(z) (g = 1 unless --fn is given).
    Grid(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Divisor,
    Min,
    Hasse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "divisor")]
    family: FamilyKind,
    /// Arity; defaults to the function's natural arity, else 1 (2 for grid).
    #[arg(long)]
    d: Option<usize>,
    /// Builtin such as `gcd_pow:1`, `lcm_pow:-1`, `zeta_d`, `ramanujan_C`,
    /// or `table:<path>` for a CSV/JSON value table.
    #[arg(long = "fn")]
    function: Option<String>,
    /// Covering bound: the set {1..m}^d for integer families.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = crate::pd::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hasse diagram file for `--family hasse`.
    #[arg(long)]
    hasse: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Eval(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Evaluation(_) | Error::NumericalFailure(_) => Failure::Eval(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

enum FnSpec {
    Builtin(Builtin),
    Table(PathBuf),
}

struct Setup {
    family: LatticeFamily,
    arity: usize,
    spec: Option<FnSpec>,
    m: usize,
}

fn parse_fn_spec(s: &str) -> CliResult<FnSpec> {
    match s.strip_prefix("table:") {
        Some(path) => Ok(FnSpec::Table(PathBuf::from(path))),
        None => Ok(FnSpec::Builtin(Builtin::parse(s)?)),
    }
}

fn read(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn setup(args: &RunArgs, default_arity: usize, default_m: Option<usize>) -> CliResult<Setup> {
    let spec = args.function.as_deref().map(parse_fn_spec).transpose()?;
    if !(args.tol >= 0.0) {
        return Err(Failure::Config(format!("--tol must be nonnegative, got {}", args.tol)));
    }
    let m = args.m.or(default_m).ok_or_else(|| Failure::Config("--m is required".into()))?;
    if m == 0 {
        return Err(Failure::Config("--m must be at least 1".into()));
    }
    if args.d == Some(0) {
        return Err(Failure::Config("--d must be at least 1".into()));
    }
    let natural = match &spec {
        Some(FnSpec::Builtin(b)) => b.natural_arity(),
        _ => None,
    };
    let (family, arity) = match args.family {
        FamilyKind::Divisor | FamilyKind::Min => {
            if args.hasse.is_some() {
                return Err(Failure::Config("--hasse requires --family hasse".into()));
            }
            let d = args.d.or(natural).unwrap_or(default_arity);
            let fam = if args.family == FamilyKind::Divisor { LatticeFamily::divisor(d) } else { LatticeFamily::min(d) };
            (fam, d)
        }
        FamilyKind::Hasse => {
            let path = args.hasse.as_ref().ok_or_else(|| Failure::Config("--family hasse needs --hasse <file>".into()))?;
            let fam = parse_hasse(&read(path)?)?;
            let d = fam.arity();
            if let Some(given) = args.d {
                if given != d {
                    return Err(Failure::Config(format!("--d {given} does not match the lattice arity {d}")));
                }
            }
            (fam, d)
        }
    };
    if let Some(nat) = natural {
        if nat != arity {
            return Err(Failure::Config(format!("function has arity {nat}, family has arity {arity}")));
        }
    }
    Ok(Setup { family, arity, spec, m })
}

impl Setup {
    fn arithmetic(&self) -> CliResult<Option<ArithmeticFunction>> {
        match &self.spec {
            Some(FnSpec::Builtin(b)) if self.family.is_integer() => Ok(Some(b.instantiate(self.arity)?)),
            Some(FnSpec::Builtin(_)) => {
                Err(Failure::Config("builtin functions need an integer family; use --fn table:<path>".into()))
            }
            _ => Ok(None),
        }
    }

    fn function(&self) -> CliResult<LatticeFunction> {
        match &self.spec {
            None => Err(Failure::Config("--fn is required".into())),
            Some(FnSpec::Table(path)) => {
                let values = export::read_value_table(&read(path)?, &self.family)?;
                Ok(LatticeFunction::table(path.display().to_string(), self.family.clone(), values))
            }
            Some(FnSpec::Builtin(_)) => {
                let af = self.arithmetic()?.expect("builtin");
                Ok(LatticeFunction::from_arithmetic(&af, self.family.clone())?)
            }
        }
    }

    fn axis_coverings(&self) -> CliResult<Vec<ElementSubset>> {
        let parts = match &self.family {
            LatticeFamily::Product(parts) => parts.clone(),
            other => vec![other.clone()],
        };
        Ok(parts.iter().map(|p| p.covering(self.m)).collect::<crate::Result<_>>()?)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_matrix(args: &RunArgs) -> CliResult<i32> {
    let s = setup(args, 1, None)?;
    let f = s.function()?;
    let covering = s.family.covering(s.m)?;
    let mm = meet_matrix(&covering, &f)?;
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Csv => export::matrix_csv(&mm),
        Format::Json => {
            let dims: Vec<usize> = s.axis_coverings()?.iter().map(ElementSubset::len).collect();
            pretty(&export::matrix_json(&mm, &dims))
        }
    };
    emit(&args.out, &text)?;
    Ok(0)
}

fn cmd_check(args: &RunArgs) -> CliResult<i32> {
    let s = setup(args, 1, None)?;
    let verdict: PdVerdict = match (&s.family, s.arithmetic()?) {
        (fam, Some(af)) if fam.factors().iter().all(|c| *c == LatticeFamily::Divisor) => pd_check_grid(&af, s.m)?,
        _ => {
            let f = s.function()?;
            let v = pd_criterion(&f, &s.family, s.m)?;
            // the criterion and the oracle must agree on small coverings
            let covering = s.family.covering(s.m)?;
            if covering.len() <= crate::pd::EXACT_LIMIT {
                let oracle = psd_oracle(&meet_matrix(&covering, &f)?.matrix, args.tol)?;
                if oracle.psd != v.is_positive() {
                    return Err(Failure::Eval("criterion and eigenvalue oracle disagree".into()));
                }
            }
            v
        }
    };
    let text = pretty(&export::verdict_json(&verdict));
    print!("{text}");
    if args.out.is_some() {
        emit(&args.out, &text)?;
    }
    Ok(if verdict.is_positive() { 0 } else { 1 })
}

fn cmd_decompose(args: &RunArgs) -> CliResult<i32> {
    let s = setup(args, 1, None)?;
    let f = s.function()?;
    let parts = s.axis_coverings()?;
    let d = kron_decompose_d(&parts, &f)?;
    let rec = reconstruct(&d)?;
    let direct = meet_matrix(&d.subset()?, &f)?;
    let residual = rec
        .matrix
        .entries()
        .iter()
        .zip(direct.matrix.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(Rational::zero(), |acc, x| if x > acc { x } else { acc });
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&export::decomposition_json(&d, &residual)),
        Format::Csv => {
            let grid = d.subset()?;
            export::table_csv(s.arity, grid.members().iter().zip(&d.diag))
        }
    };
    emit(&args.out, &text)?;
    if !residual.is_zero() {
        return Err(Failure::Eval(format!("reconstruction residual {residual} is not zero")));
    }
    Ok(0)
}

fn cmd_grid(args: &RunArgs) -> CliResult<i32> {
    if args.family == FamilyKind::Hasse {
        return Err(Failure::Config("grid needs --family divisor or min".into()));
    }
    let s = setup(args, 2, Some(10))?;
    let g = match &s.spec {
        None => LatticeFunction::constant(s.family.clone(), Rational::from_integer(1.into())),
        Some(_) => s.function()?,
    };
    let f = LatticeFunction::zeta_sum(g);
    let covering = s.family.covering(s.m)?;
    let values: Vec<Rational> = covering.members().iter().map(|x| f.eval(x)).collect::<crate::Result<_>>()?;
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => export::table_csv(s.arity, covering.members().iter().zip(&values)),
        Format::Json => {
            let rows: Vec<serde_json::Value> = covering
                .members()
                .iter()
                .zip(&values)
                .map(|(x, v)| serde_json::json!({ "point": x, "value": v.to_string() }))
                .collect();
            pretty(&serde_json::json!({ "schema": export::SCHEMA, "values": rows }))
        }
    };
    emit(&args.out, &text)?;
    Ok(0)
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Matrix(a) => cmd_matrix(a),
        Command::Check(a) => cmd_check(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Grid(a) => cmd_grid(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Eval(msg)) => {
            eprintln!("evaluation error: {msg}");
            3
        }
    }
}
