//! Command-line front end: point evaluation, entropies, verification suites,
//! tables and route cross-checks.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
//! failure.

pub mod table;
pub mod targets;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use heun_core::coincidence::entropy;
use heun_core::verify::{check_relation, sweep_identities, Mutation};
use heun_core::{EntropyKind, RelationId, SeriesOptions};

use table::{emit_table, Format, Grid, Row};
use targets::{EvalError, Target, TargetSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Outcome of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExitReport {
    pub code: i32,
    pub summary: String,
}

impl ExitReport {
    fn ok(summary: impl Into<String>) -> Self {
        ExitReport {
            code: EXIT_OK,
            summary: summary.into(),
        }
    }

    fn usage(summary: impl Into<String>) -> Self {
        ExitReport {
            code: EXIT_USAGE,
            summary: summary.into(),
        }
    }
}

impl From<EvalError> for ExitReport {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Usage(m) => ExitReport::usage(m),
            EvalError::Numerical(m) => ExitReport {
                code: EXIT_NUMERICAL,
                summary: m,
            },
        }
    }
}

impl From<io::Error> for ExitReport {
    fn from(e: io::Error) -> Self {
        ExitReport {
            code: EXIT_NUMERICAL,
            summary: format!("I/O error: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "heun", version, about = "Heun functions and indices of coincidence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a function at one or more points.
    Eval(EvalArgs),
    /// Rényi and Tsallis entropies of an index of coincidence.
    Entropy(EntropyArgs),
    /// Check the binomial identities exactly and every relation numerically.
    Verify(VerifyArgs),
    /// Evaluate a function on a grid and write a CSV or JSON table.
    Table(TableArgs),
    /// Compare every route of a function on a grid.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args, Debug)]
struct TargetArgs {
    #[arg(long, value_enum)]
    target: Target,
    /// Index size n, or the family size
    #[arg(long)]
    n: Option<u32>,
    /// Derivative order for Kderiv.
    #[arg(long)]
    j: Option<u32>,
    /// Named parameter, e.g. `--param alpha=1.5`; repeatable.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 10_000)]
    max_terms: usize,
    #[arg(long, default_value = "1e-15")]
    rel_tol: f64,
}

impl TargetArgs {
    fn spec(&self) -> Result<TargetSpec, EvalError> {
        let opts = SeriesOptions::new(self.max_terms, self.rel_tol)?;
        let mut params = BTreeMap::new();
        for (k, v) in &self.params {
            if params.insert(k.clone(), *v).is_some() {
                return Err(EvalError::Usage(format!("parameter `{k}` given twice")));
            }
        }
        Ok(TargetSpec {
            target: self.target,
            n: self.n,
            j: self.j,
            params,
            opts,
        })
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad number in `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("parameter `{k}` must be finite"));
    }
    Ok((k.trim().to_string(), v))
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    /// Evaluation route; the target's default when omitted
    #[arg(long)]
    method: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Renyi,
    Tsallis,
}

impl From<Kind> for EntropyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Renyi => EntropyKind::Renyi,
            Kind::Tsallis => EntropyKind::Tsallis,
        }
    }
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x: Vec<f64>,
    /// Evaluation route; the target's default when omitted
    #[arg(long)]
    method: Option<String>,
    /// Print only this entropy; both otherwise.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Largest n of the exact identity sweep.
    #[arg(long, default_value_t = 50)]
    max_n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random trials per relation.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Absolute residual allowed in the relation checks.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Restrict to these relations (comma separated names).
    #[arg(long, value_delimiter = ',')]
    relation: Vec<String>,
    #[arg(long, hide = true)]
    inject_mutation: Option<String>,
}

#[derive(Args, Debug)]
struct PointsArgs {
    /// `start:stop:step`
    #[arg(long, conflicts_with = "x")]
    grid: Option<Grid>,
    /// Explicit points, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
}

impl PointsArgs {
    fn points(&self, target: Target) -> Result<Vec<f64>, EvalError> {
        if !target.takes_x() {
            return Ok(vec![1.0]);
        }
        match &self.grid {
            Some(g) => Ok(g.points()),
            None if !self.x.is_empty() => Ok(self.x.clone()),
            None => Err(EvalError::Usage("give --grid or --x".into())),
        }
    }
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    points: PointsArgs,
    /// Evaluation route; the target's default when omitted
    #[arg(long)]
    method: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    output: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CrosscheckArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    points: PointsArgs,
    /// Fail with exit code 1 when the relative discrepancy exceeds this.
    #[arg(long)]
    tol: Option<f64>,
}

/// Parses `argv` (program name first), runs the command and writes its
/// output to `out`. Diagnostics go into the returned summary.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> ExitReport
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    match write!(out, "{}", e.render()) {
                        Ok(()) => ExitReport::ok(""),
                        Err(io) => io.into(),
                    }
                }
                _ => ExitReport::usage(e.render().to_string()),
            };
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Entropy(a) => cmd_entropy(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Table(a) => cmd_table(&a, out),
        Command::Crosscheck(a) => cmd_crosscheck(&a, out),
    };
    result.unwrap_or_else(|r| r)
}

type CmdResult = Result<ExitReport, ExitReport>;

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.target.spec()?;
    let route = spec.resolve_route(a.method.as_deref())?;
    let points = if spec.target.takes_x() {
        if a.x.is_empty() {
            return Err(ExitReport::usage("give --x"));
        }
        a.x.clone()
    } else {
        vec![1.0]
    };
    for x in &points {
        let v = spec.evaluate(route, *x)?;
        writeln!(out, "{}", v.value).map_err(ExitReport::from)?;
    }
    Ok(ExitReport::ok(format!("{} values", points.len())))
}

fn cmd_entropy(a: &EntropyArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.target.spec()?;
    if !matches!(spec.target, Target::F | Target::G | Target::K) {
        return Err(ExitReport::usage(format!(
            "entropy needs an index of coincidence (F, G or K), got {}",
            spec.target
        )));
    }
    let route = spec.resolve_route(a.method.as_deref())?;
    for x in &a.x {
        let s = spec.evaluate(route, *x)?.value;
        let line = match a.kind {
            Some(k) => format!("{}", entropy(s, k.into()).map_err(EvalError::from)?),
            None => format!(
                "renyi={} tsallis={}",
                entropy(s, EntropyKind::Renyi).map_err(EvalError::from)?,
                entropy(s, EntropyKind::Tsallis).map_err(EvalError::from)?
            ),
        };
        writeln!(out, "{line}").map_err(ExitReport::from)?;
    }
    Ok(ExitReport::ok(""))
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let mutation = match &a.inject_mutation {
        Some(s) => Some(s.parse::<Mutation>().map_err(|e| ExitReport::usage(e.to_string()))?),
        None => None,
    };
    let relations: Vec<RelationId> = if a.relation.is_empty() {
        RelationId::ALL.to_vec()
    } else {
        a.relation
            .iter()
            .map(|r| r.parse().map_err(|e: heun_core::Error| ExitReport::usage(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    if a.trials == 0 || !(a.tol > 0.0) {
        return Err(ExitReport::usage("--trials and --tol must be positive"));
    }
    let io = |e: io::Error| ExitReport::from(e);
    let sweep = sweep_identities(a.max_n, mutation.as_ref());
    writeln!(
        out,
        "identities n<={} checked={} {}",
        a.max_n,
        sweep.checked,
        if sweep.passed() { "PASS" } else { "FAIL" }
    )
    .map_err(io)?;
    for (id, n, k) in sweep.failures.iter().take(5) {
        writeln!(out, "  identity {id:?} fails at n={n} k={k}").map_err(io)?;
    }
    let mut failed = usize::from(!sweep.passed());
    for id in relations {
        let report = check_relation(id, a.trials, a.tol, a.seed).map_err(EvalError::from)?;
        if !report.passed {
            failed += 1;
        }
        writeln!(out, "{report}").map_err(io)?;
    }
    if failed > 0 {
        Ok(ExitReport {
            code: EXIT_VERIFY_FAILED,
            summary: format!("{failed} verification check(s) failed"),
        })
    } else {
        Ok(ExitReport::ok("all checks passed"))
    }
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.target.spec()?;
    let route = spec.resolve_route(a.method.as_deref())?;
    let mut rows = Vec::new();
    for x in a.points.points(spec.target)? {
        let v = spec.evaluate(route, x)?;
        rows.push(Row {
            x,
            value: v.value,
            error_estimate: v.error_estimate,
            method: route.to_string(),
        });
    }
    let count = match &a.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            emit_table(&rows, a.output, &mut file)?
        }
        None => emit_table(&rows, a.output, out)?,
    };
    Ok(ExitReport::ok(format!("{count} rows")))
}

fn cmd_crosscheck(a: &CrosscheckArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.target.spec()?;
    let routes = spec.target.routes();
    if routes.len() < 2 {
        return Err(ExitReport::usage(format!(
            "target {} has a single route",
            spec.target
        )));
    }
    let points = a.points.points(spec.target)?;
    let io = |e: io::Error| ExitReport::from(e);
    let reference = routes[0];
    let mut overall = 0.0f64;
    for route in &routes[1..] {
        let mut worst = (0.0f64, 0.0f64, f64::NAN);
        let mut evaluated = 0;
        for &x in &points {
            let base = match spec.evaluate(reference, x) {
                Ok(v) => v.value,
                Err(EvalError::Usage(m)) => return Err(ExitReport::usage(m)),
                Err(_) => continue,
            };
            // a route may not cover every point, e.g. the definitional sums
            let other = match spec.evaluate(route, x) {
                Ok(v) => v.value,
                Err(EvalError::Usage(m)) => return Err(ExitReport::usage(m)),
                Err(_) => continue,
            };
            evaluated += 1;
            let abs = (other - base).abs();
            let rel = abs / base.abs().max(f64::MIN_POSITIVE);
            if rel > worst.1 || evaluated == 1 {
                worst = (abs, rel, x);
            }
        }
        overall = overall.max(worst.1);
        writeln!(
            out,
            "{route} vs {reference}: points={evaluated} max_abs={:.3e} max_rel={:.3e} at x={}",
            worst.0, worst.1, worst.2
        )
        .map_err(io)?;
    }
    writeln!(out, "max_discrepancy={overall:.3e}").map_err(io)?;
    match a.tol {
        Some(t) if overall > t => Ok(ExitReport {
            code: EXIT_VERIFY_FAILED,
            summary: format!("routes disagree by {overall:.3e} > {t:.1e}"),
        }),
        _ => Ok(ExitReport::ok("")),
    }
}

impl From<heun_core::Error> for ExitReport {
    fn from(e: heun_core::Error) -> Self {
        EvalError::from(e).into()
    }
}
