//! Command-line front end: `solve`, `scan`, `green`, `verify`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::fcurve::{self, FCurve};
use crate::fundamental::{self, ExtremalFunction};
use crate::green::GreenEvaluator;
use crate::minimizer::{self, Attainment, Minimization, SolverConfig};
use crate::oracle::DiscreteRayleighProblem;
use crate::potential::{Potential, PotentialSpec};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sobolev1d", version, about = "Best constants of the 1D sup-norm Sobolev inequality with a potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute m(V), the best constant and the attainment verdict.
    Solve(CommonArgs),
    /// Tabulate F, F', F'' and the fundamental solutions on a grid.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluation grid `lo,hi,n` (n points); defaults to the scan window.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Tabulate the Green function on a lattice.
    Green {
        #[command(flatten)]
        common: CommonArgs,
        /// x lattice `lo,hi,n`.
        #[arg(long, allow_hyphen_values = true)]
        xs: String,
        /// y lattice `lo,hi,n`.
        #[arg(long, allow_hyphen_values = true)]
        ys: String,
    },
    /// Run the invariant checks and the discrete cross-check.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Potential as a JSON file path or inline JSON.
    #[arg(long)]
    pub potential: String,
    /// Solution window `x_min,x_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Integrator tolerance.
    #[arg(long, default_value_t = fundamental::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Half-width of the discrete cross-check domain.
    #[arg(long = "oracle-L", default_value_t = 30.0)]
    pub oracle_l: f64,
    /// Mesh size of the discrete cross-check.
    #[arg(long = "oracle-h", default_value_t = 0.005)]
    pub oracle_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(e) => match e {
                Error::RiccatiBlowUp { .. } | Error::Integration { .. } => EXIT_SOLVER,
                _ => EXIT_CONFIG,
            },
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    potential_spec: &'a PotentialSpec,
    result: T,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Solve(c) => cmd_solve(c, stdout),
        Command::Scan { common, grid } => cmd_scan(common, grid.as_deref(), stdout),
        Command::Green { common, xs, ys } => cmd_green(common, xs, ys, stdout),
        Command::Verify(c) => cmd_verify(c, stdout),
    }
}

fn load_spec(arg: &str) -> Result<PotentialSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read potential file {arg}: {e}")))?
    };
    PotentialSpec::from_json(&text).map_err(|e| CliError::Config(format!("malformed potential spec: {e}")))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse {what} `{text}`")))
        })
        .collect()
}

fn parse_window(text: &str) -> Result<(f64, f64), CliError> {
    match parse_list(text, "window")?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Config(format!("window must be `x_min,x_max`, got `{text}`"))),
    }
}

/// `lo,hi,n` → `n` evenly spaced points (just `lo` when `n = 1`).
pub fn parse_lattice(text: &str) -> Result<Vec<f64>, CliError> {
    let parts = parse_list(text, "grid")?;
    let [lo, hi, n] = parts.as_slice() else {
        return Err(CliError::Config(format!("grid must be `lo,hi,n`, got `{text}`")));
    };
    if !(*n >= 1.0) || n.fract() != 0.0 {
        return Err(CliError::Config(format!("grid needs a positive integer point count, got {n}")));
    }
    if !(hi >= lo) {
        return Err(CliError::Config(format!("grid needs lo <= hi, got {lo} > {hi}")));
    }
    let n = *n as usize;
    if n == 1 {
        return Ok(vec![*lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

struct Loaded {
    spec: PotentialSpec,
    potential: Potential,
    config: SolverConfig,
}

fn load(c: &CommonArgs) -> Result<Loaded, CliError> {
    let spec = load_spec(&c.potential)?;
    let potential = spec.build()?;
    let window = c.window.as_deref().map(parse_window).transpose()?;
    let config = SolverConfig {
        window,
        tol: c.tol,
        ..SolverConfig::default()
    };
    let (lo, hi) = config.resolve_window(&potential);
    fundamental::validate_window(&potential, lo, hi, c.tol)?;
    Ok(Loaded { spec, potential, config })
}

fn emit(c: &CommonArgs, stdout: &mut dyn Write, artifact: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(artifact.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write output: {e}"))),
    }
}

fn to_json<T: Serialize>(command: &str, spec: &PotentialSpec, result: T) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        potential_spec: spec,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12}")).unwrap_or_else(|| "none".into())
}

pub fn cmd_solve(c: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(c)?;
    let report = minimizer::minimize(&l.potential, &l.config)?;
    let attainment = serde_json::to_value(report.attainment).unwrap();
    let attainment = attainment.as_str().unwrap_or_default();
    let mut summary = String::new();
    writeln!(summary, "m = {:.12}", report.m).unwrap();
    writeln!(summary, "C = {:.12}", report.best_constant).unwrap();
    writeln!(summary, "attainment = {attainment}").unwrap();
    writeln!(summary, "a* = {}", fmt_opt(report.a_star)).unwrap();
    stdout
        .write_all(summary.as_bytes())
        .map_err(|e| CliError::Config(format!("cannot write output: {e}")))?;
    let artifact = match c.format {
        Format::Json => to_json("solve", &l.spec, &report),
        Format::Csv => format!(
            "m,best_constant,attainment,a_star\n{:e},{:e},{},{}\n",
            report.m,
            report.best_constant,
            attainment,
            report.a_star.map(|a| format!("{a:e}")).unwrap_or_default()
        ),
    };
    emit(c, stdout, &artifact)
}

pub fn cmd_scan(c: &CommonArgs, grid: Option<&str>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(c)?;
    let (lo, hi) = l.config.resolve_window(&l.potential);
    let grid = match grid {
        Some(g) => parse_lattice(g)?,
        None => Vec::new(),
    };
    let (plus, minus) = fundamental::solve_pair(&l.potential, lo, hi, c.tol)?;
    let grid = if grid.is_empty() {
        fcurve::default_grid(&plus, fcurve::DEFAULT_SPACING)
    } else {
        grid
    };
    let curve = FCurve::build(&plus, &minus, &l.potential, &grid)?;
    let artifact = match c.format {
        Format::Csv => curve.to_csv(),
        Format::Json => to_json("scan", &l.spec, ScanResult {
            wronskian: curve.wronskian(),
            samples: curve
                .samples()
                .iter()
                .map(|s| ScanRow {
                    a: s.a,
                    f: s.f,
                    df: s.df,
                    d2f: s.d2f,
                    phi_plus: s.phi_plus(),
                    phi_minus: s.phi_minus(),
                })
                .collect(),
        }),
    };
    emit(c, stdout, &artifact)
}

#[derive(Serialize)]
struct ScanResult {
    wronskian: f64,
    samples: Vec<ScanRow>,
}

#[derive(Serialize)]
struct ScanRow {
    a: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "dF")]
    df: f64,
    #[serde(rename = "d2F")]
    d2f: f64,
    phi_plus: f64,
    phi_minus: f64,
}

pub fn cmd_green(c: &CommonArgs, xs: &str, ys: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(c)?;
    let xs = parse_lattice(xs)?;
    let ys = parse_lattice(ys)?;
    let (lo, hi) = l.config.resolve_window(&l.potential);
    let (plus, minus) = fundamental::solve_pair(&l.potential, lo, hi, c.tol)?;
    let g = GreenEvaluator::new(&plus, &minus)?;
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            rows.push((x, y, g.eval(x, y)?));
        }
    }
    let artifact = match c.format {
        Format::Csv => {
            let mut s = String::from("x,y,G\n");
            for (x, y, v) in &rows {
                writeln!(s, "{x:e},{y:e},{v:e}").unwrap();
            }
            s
        }
        Format::Json => to_json("green", &l.spec, &rows),
    };
    emit(c, stdout, &artifact)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

fn check(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value <= threshold,
        value,
        threshold,
        detail: detail.into(),
    }
}

/// Runs the invariant suite and the discrete cross-check.
pub fn verify_checks(potential: &Potential, config: &SolverConfig, oracle_l: f64, oracle_h: f64) -> Result<Vec<CheckResult>, Error> {
    let mut out = Vec::new();
    let (lo, hi) = config.resolve_window(potential);

    let n = 8000;
    let mut grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    for b in potential.breakpoints() {
        grid.push(*b);
        grid.push(b - 1e-9 * b.abs().max(1.0));
    }
    let bounds = potential.check_bounds(&grid);
    out.push(check(
        "declared bounds",
        bounds.violations.len() as f64,
        0.0,
        format!(
            "sampled [{:.6}, {:.6}] vs declared [{:.6}, {:.6}]",
            bounds.sampled_min, bounds.sampled_max, bounds.lower_bound, bounds.upper_bound
        ),
    ));

    let run: Minimization = minimizer::run(potential, config)?;
    let r = &run.report;
    let tol = config.tol;

    for sol in [&run.plus, &run.minus] {
        let inv = sol.check_invariants();
        let side = format!("{:?}", sol.side()).to_lowercase();
        out.push(check(
            &format!("riccati band and envelope ({side})"),
            (inv.riccati_band_violations.len() + inv.envelope_violations.len()) as f64,
            0.0,
            format!("{} grid points", inv.points_checked),
        ));
        out.push(check(&format!("riccati residual ({side})"), inv.max_riccati_residual, 10.0 * tol, ""));
    }

    let mut centers = vec![0.0];
    if let Some(a) = r.a_star {
        centers.push(a);
    }
    let mut decay_violations = 0usize;
    for a in centers {
        let u = ExtremalFunction::new(&run.plus, &run.minus, a)?;
        decay_violations += u.check_decay_bounds(&run.plus.grid())?.violations.len();
    }
    out.push(check("extremal decay envelope", decay_violations as f64, 0.0, ""));

    let m_out = (r.lower_bound - 1e-8 - r.m).max(r.m - r.upper_bound - 1e-8).max(0.0);
    out.push(check(
        "m within [2v0/sqrt(v1), 2v1/sqrt(v0)]",
        m_out,
        0.0,
        format!("m = {:.12} in [{:.6}, {:.6}]", r.m, r.lower_bound, r.upper_bound),
    ));
    out.push(check("wronskian constancy", run.curve.wronskian_deviation(), 1e-8, "relative"));
    out.push(check("first-derivative identities", run.curve.derivative_identity_deviation(), 1e-8, "scaled by F^2"));
    if potential.is_continuous() {
        out.push(check(
            "second-derivative identities",
            run.curve.second_derivative_identity_deviation(),
            1e-6,
            "scaled by F^3",
        ));
        let grid = run.curve.grid();
        let step = (grid.len() / 100).max(1);
        let mut samples: Vec<f64> = grid.iter().step_by(step).copied().collect();
        samples.extend(r.critical_points.iter().map(|c| c.a));
        let eq = fcurve::check_condition_equivalence(&run.curve, potential, &samples, fcurve::DEFAULT_EQUIVALENCE_TOL)?;
        out.push(check(
            "critical-point condition equivalence",
            eq.disagreements.len() as f64,
            0.0,
            format!("{} samples", samples.len()),
        ));
    }

    let problem = DiscreteRayleighProblem::new(potential, oracle_l, oracle_h)?;
    let dm = problem.discrete_minimize();
    out.push(check(
        "discrete cross-check",
        (dm.m_estimate - r.m).abs(),
        1e-2,
        format!("discrete m = {:.8} at a = {:.4}", dm.m_estimate, dm.a_star),
    ));
    if r.attainment == Attainment::Attained {
        let u = minimizer::extremal(r, &run.plus, &run.minus)?.expect("attained");
        let energy = minimizer::extremal_energy(&u)?;
        out.push(check("extremal energy equals m", (energy - r.m).abs(), 1e-6, ""));
    }
    Ok(out)
}

pub fn cmd_verify(c: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(c)?;
    let checks = verify_checks(&l.potential, &l.config, c.oracle_l, c.oracle_h)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let artifact = match c.format {
        Format::Json => to_json("verify", &l.spec, &checks),
        Format::Csv => {
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            let mut s = String::new();
            for ch in &checks {
                writeln!(
                    s,
                    "{:<width$}  {}  {:>12.4e}  <= {:>9.1e}  {}",
                    ch.name,
                    if ch.passed { "PASS" } else { "FAIL" },
                    ch.value,
                    ch.threshold,
                    ch.detail,
                )
                .unwrap();
            }
            s
        }
    };
    emit(c, stdout, &artifact)?;
    if failed > 0 {
        Err(CliError::Verification(failed))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("sobolev1d").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn lattice_parsing() {
        assert_eq!(parse_lattice("0,1,3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_lattice("2,2,1").unwrap(), vec![2.0]);
        assert!(parse_lattice("0,1,0").is_err());
        assert!(parse_lattice("0,1").is_err());
        assert!(parse_lattice("1,0,3").is_err());
    }

    #[test]
    fn solve_constant() {
        let (code, out, _) = run(&["solve", "--potential", r#"{"kind":"constant","value":4}"#]);
        assert_eq!(code, 0);
        assert!(out.contains("m = 4.0"));
        assert!(out.contains("C = 0.5"));
        assert!(out.contains("\"schema_version\": 1"));
    }

    #[test]
    fn config_errors() {
        let (code, _, err) = run(&["solve", "--potential", "{not json"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("malformed"));
        let (code, _, _) = run(&["solve", "--potential", r#"{"kind":"constant","value":1}"#, "--window", "-5,5"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run(&["solve", "--potential", r#"{"kind":"constant","value":1}"#, "--tol", "1e-3"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run(&["frobnicate"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn green_lattice() {
        let (code, out, _) = run(&[
            "green", "--potential", r#"{"kind":"constant","value":1}"#, "--xs", "0,1,2", "--ys", "0,0,1", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "x,y,G");
        let g: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert!((g - (-1f64).exp() / 2.0).abs() < 1e-10);
        let (code, _, _) = run(&["green", "--potential", r#"{"kind":"constant","value":1}"#, "--xs", "0,40,2", "--ys", "0,0,1"]);
        assert_eq!(code, EXIT_CONFIG);
    }
}
