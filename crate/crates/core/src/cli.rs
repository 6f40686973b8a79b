//! The `deadbeat` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                                  |
//! |------|----------------------------------------------------------|
//! | 0    | success / controllable / tracking guarantee met          |
//! | 1    | system not controllable                                  |
//! | 2    | input error (unreadable file, bad field, bad flag)       |
//! | 3    | `A` singular; rerun `gain` with `--dual`                 |
//! | 4    | tracking or batch check failed                           |
//! | 5    | numerical or internal failure                            |
//!
//! Tolerances default to [`Tolerance::default`]; the `DEADBEAT_TOL`
//! environment variable (`rank_rel` or `rank_rel,residual_rel`) overrides the
//! defaults and the `--tol` / `--residual-tol` flags override both.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linear::{self, Form, GainAlgorithm, GainResult, LinearSystem, LinearTracker};
use crate::nonlinear;
use crate::random;
use crate::simulate::{self, BatchConfig, Family, TrackingRun};
use crate::subspace::Tolerance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNCONTROLLABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

pub const TOL_ENV: &str = "DEADBEAT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "deadbeat",
    version,
    about = "Deadbeat controllability, gains and trackers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PBH and subspace-chain controllability tests.
    Check(CheckArgs),
    /// Scalar-input deadbeat gain.
    Gain(GainArgs),
    /// Simulate the deadbeat tracker against the autonomous plant.
    Track(TrackArgs),
    /// Run one of the nonlinear demos (`homogeneous` or `positive`).
    Demo(DemoArgs),
    /// Seeded batch experiment over random systems.
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// TOML system file with fields n, m, A, B (row-major) and optional form.
    #[arg(required_unless_present = "a_matrix")]
    pub system: Option<PathBuf>,
    /// Plain-text A matrix (one row per line), used instead of a system file.
    #[arg(long, requires = "b_matrix", conflicts_with = "system")]
    pub a_matrix: Option<PathBuf>,
    /// Plain-text B matrix, paired with --a-matrix.
    #[arg(long, requires = "a_matrix")]
    pub b_matrix: Option<PathBuf>,
    /// Plant form when reading plain-text matrices.
    #[arg(long, value_parser = parse_form, default_value = "factored")]
    pub form: Form,
}

#[derive(Debug, Args, Default, Clone, Copy)]
pub struct TolArgs {
    /// Relative rank cutoff.
    #[arg(long = "tol")]
    pub rank_rel: Option<f64>,
    /// Relative residual threshold.
    #[arg(long = "residual-tol")]
    pub residual_rel: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Use the dual algorithm, which also handles singular A.
    #[arg(long)]
    pub dual: bool,
    /// Print a JSON object instead of text.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Reference initial state, comma separated. Random if omitted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_state)]
    pub x0: Option<StateArg>,
    /// Tracker initial state, comma separated. Random if omitted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_state)]
    pub xhat0: Option<StateArg>,
    /// Seed for omitted initial states.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of steps; defaults to 2(n + 1).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Convergence tolerance for ‖x̂ − x‖ ≤ tol·(1 + ‖x‖).
    #[arg(long, default_value_t = simulate::DEFAULT_TRACKING_TOL)]
    pub track_tol: f64,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    pub name: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub track_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// TOML batch configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// scalar-gain, singular-gain, linear-tracker, homogeneous or positive.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub track_tol: Option<f64>,
    /// Run sequentially.
    #[arg(long)]
    pub serial: bool,
}

fn parse_form(s: &str) -> Result<Form, String> {
    match s {
        "factored" => Ok(Form::Factored),
        "standard" => Ok(Form::Standard),
        _ => Err(format!(
            "unknown form `{s}` (expected factored or standard)"
        )),
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
        format!(
            "unknown family `{s}` (expected one of {})",
            names.join(", ")
        )
    })
}

/// A comma-separated state vector given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct StateArg(pub Vec<f64>);

fn parse_state(s: &str) -> Result<StateArg, String> {
    parse_vector(s).map(StateArg)
}

/// Parses `"1, -2.5, 3"`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// System files

/// On-disk system description.
///
/// ```toml
/// n = 2
/// m = 1
/// form = "factored"
/// A = [0.0, 1.0, -1.0, 0.0]
/// B = [1.0, 0.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub form: Form,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let file: SystemFile = toml::from_str(text).map_err(|e| e.to_string())?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("field `n` must be at least 1".into());
        }
        if self.m == 0 {
            return Err("field `m` must be at least 1".into());
        }
        let check = |name: &str, v: &[f64], want: usize, shape: &str| {
            if v.len() != want {
                return Err(format!(
                    "field `{name}` has {} entries, expected {shape} = {want}",
                    v.len()
                ));
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(format!("field `{name}` entry {i} is not finite"));
            }
            Ok(())
        };
        check("A", &self.a, self.n * self.n, "n*n")?;
        check("B", &self.b, self.n * self.m, "n*m")
    }

    pub fn to_system(&self) -> Result<LinearSystem, String> {
        LinearSystem::new(
            DMatrix::from_row_slice(self.n, self.n, &self.a),
            DMatrix::from_row_slice(self.n, self.m, &self.b),
            self.form,
        )
        .map_err(|e| e.to_string())
    }

    pub fn from_system(sys: &LinearSystem) -> Self {
        let row_major = |m: &DMatrix<f64>| m.transpose().as_slice().to_vec();
        Self {
            n: sys.state_dim(),
            m: sys.input_dim(),
            form: sys.form(),
            a: row_major(sys.a()),
            b: row_major(sys.b()),
        }
    }
}

/// Reads a whitespace-separated matrix, one row per line. Blank lines and
/// `#` comments are ignored.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("line {}: `{t}` is not a finite number", lineno + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "line {}: row has {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("matrix file is empty".into());
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(r, c, rows.into_iter().flatten()))
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_system(args: &SystemArgs) -> Result<LinearSystem, String> {
    if let Some(path) = &args.system {
        let text = read_text(path)?;
        let file = SystemFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        return file.to_system();
    }
    let (Some(a), Some(b)) = (&args.a_matrix, &args.b_matrix) else {
        return Err("give a system file or both --a-matrix and --b-matrix".into());
    };
    let am = parse_matrix_text(&read_text(a)?).map_err(|e| format!("{}: {e}", a.display()))?;
    let bm = parse_matrix_text(&read_text(b)?).map_err(|e| format!("{}: {e}", b.display()))?;
    LinearSystem::new(am, bm, args.form).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Tolerances

/// Parses a `DEADBEAT_TOL` value: `rank_rel` or `rank_rel,residual_rel`.
pub fn parse_tol_env(value: &str) -> Result<Tolerance, String> {
    let parts = parse_vector(value).map_err(|e| format!("{TOL_ENV}: {e}"))?;
    let default = Tolerance::default();
    let (rank, resid) = match parts.as_slice() {
        [r] => (*r, default.residual_rel),
        [r, s] => (*r, *s),
        _ => {
            return Err(format!(
                "{TOL_ENV}: expected one or two numbers, got `{value}`"
            ))
        }
    };
    Tolerance::new(rank, resid).map_err(|e| format!("{TOL_ENV}: {e}"))
}

fn resolve_tol(flags: &TolArgs) -> Result<Tolerance, String> {
    let base = match std::env::var(TOL_ENV) {
        Ok(v) if !v.trim().is_empty() => parse_tol_env(&v)?,
        _ => Tolerance::default(),
    };
    Tolerance::new(
        flags.rank_rel.unwrap_or(base.rank_rel),
        flags.residual_rel.unwrap_or(base.residual_rel),
    )
    .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Dispatch

/// Parses `args` (including the program name) and runs the command, writing
/// to `out` / `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a, out),
        Command::Gain(a) => cmd_gain(&a, out),
        Command::Track(a) => cmd_track(&a, out),
        Command::Demo(a) => cmd_demo(&a, out),
        Command::Batch(a) => cmd_batch(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

type CmdResult = Result<i32, Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn io_error(e: std::io::Error) -> Failure {
    input_error(format!("cannot write output: {e}"))
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_)
            | Error::UnsupportedInputWidth(_)
            | Error::DomainViolation(_) => EXIT_INPUT,
            Error::Uncontrollable(_) | Error::NotControllable | Error::NotNilpotent(_) => {
                EXIT_UNCONTROLLABLE
            }
            Error::SingularA { .. } => EXIT_SINGULAR,
            Error::DivergedAtStep(_) => EXIT_CHECK_FAILED,
            Error::NumericalFailure(_) | Error::Internal(_) => EXIT_INTERNAL,
        };
        let mut message = e.to_string();
        if code == EXIT_SINGULAR {
            message.push_str(" (try --dual)");
        }
        Failure { code, message }
    }
}

fn fmt_row(xs: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = xs.into_iter().map(|v| format!("{v:?}")).collect();
    format!("[{}]", parts.join(", "))
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let sys = load_system(&args.system).map_err(input_error)?;
    let tol = resolve_tol(&args.tol).map_err(input_error)?;
    let report = linear::check_controllability(&sys, &tol)?;
    let verdict = |ok: bool| {
        if ok {
            "controllable"
        } else {
            "not controllable"
        }
    };
    let dims: Vec<String> = report.chain_dims.iter().map(|d| d.to_string()).collect();
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "pbh: {}", verdict(report.pbh_pass))?;
        writeln!(out, "chain dims: {}", dims.join(" "))?;
        writeln!(out, "geometric: {}", verdict(report.geometric_pass))?;
        if let Some((re, im)) = report.failing_eigenvalue {
            writeln!(
                out,
                "failing eigenvalue: {re:?} {} {:?}i",
                if im < 0.0 { '-' } else { '+' },
                im.abs()
            )?;
        }
        Ok(())
    };
    w(out).map_err(io_error)?;
    Ok(if report.controllable() {
        EXIT_OK
    } else {
        EXIT_UNCONTROLLABLE
    })
}

/// Machine-readable `gain` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub algorithm: String,
    pub form: Form,
    pub k2: Vec<f64>,
    pub k: Vec<f64>,
    pub nilpotency_residual: f64,
}

impl GainReport {
    fn new(algo: GainAlgorithm, form: Form, g: &GainResult) -> Self {
        Self {
            algorithm: match algo {
                GainAlgorithm::Primal => "primal",
                GainAlgorithm::Dual => "dual",
            }
            .to_string(),
            form,
            k2: g.k2.iter().copied().collect(),
            k: g.k.iter().copied().collect(),
            nilpotency_residual: g.nilpotency_residual,
        }
    }
}

fn cmd_gain(args: &GainArgs, out: &mut dyn Write) -> CmdResult {
    let sys = load_system(&args.system).map_err(input_error)?;
    let tol = resolve_tol(&args.tol).map_err(input_error)?;
    let algo = if args.dual {
        GainAlgorithm::Dual
    } else {
        GainAlgorithm::Primal
    };
    let g = linear::compute_gain(&sys, algo, &tol)?;
    let report = GainReport::new(algo, sys.form(), &g);
    if args.json {
        let text = serde_json::to_string(&report).map_err(|e| Failure {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        })?;
        writeln!(out, "{text}").map_err(io_error)?;
    } else {
        (|| -> std::io::Result<()> {
            writeln!(out, "algorithm: {}", report.algorithm)?;
            writeln!(out, "K2: {}", fmt_row(report.k2.iter().copied()))?;
            writeln!(out, "K: {}", fmt_row(report.k.iter().copied()))?;
            writeln!(out, "residual: {:e}", report.nilpotency_residual)
        })()
        .map_err(io_error)?;
    }
    Ok(EXIT_OK)
}

fn initial_state(
    given: &Option<StateArg>,
    n: usize,
    what: &str,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<DVector<f64>, Failure> {
    match given {
        Some(StateArg(v)) if v.len() == n => Ok(DVector::from_column_slice(v)),
        Some(StateArg(v)) => Err(input_error(format!(
            "--{what} has {} entries, expected {n}",
            v.len()
        ))),
        None => Ok(random::gaussian_vector(rng, n)),
    }
}

fn write_run(run: &TrackingRun, path: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = path {
        let file =
            fs::File::create(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        run.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| input_error(e.to_string()))?;
    }
    Ok(())
}

fn cmd_track(args: &TrackArgs, out: &mut dyn Write) -> CmdResult {
    let sys = load_system(&args.system).map_err(input_error)?;
    let tol = resolve_tol(&args.tol).map_err(input_error)?;
    let n = sys.state_dim();
    let mut rng = random::run_rng(args.seed, 0);
    let x0 = initial_state(&args.x0, n, "x0", &mut rng)?;
    let xhat0 = initial_state(&args.xhat0, n, "xhat0", &mut rng)?;
    let steps = args.steps.unwrap_or(simulate::default_steps(n));
    if !(args.track_tol.is_finite() && args.track_tol > 0.0) {
        return Err(input_error("--track-tol must be positive"));
    }

    let (run, p) = match sys.form() {
        Form::Factored => {
            let tracker = LinearTracker::from_system(&sys, &tol)?;
            let run = simulate::simulate_linear(&tracker, &x0, &xhat0, steps, args.track_tol)?;
            (run, tracker.horizon())
        }
        Form::Standard => {
            // x̂⁺ = A x̂ + B K (x − x̂): the error obeys e⁺ = (A − B K) e.
            if sys.input_dim() != 1 {
                return Err(input_error(
                    "tracking a standard-form system needs m = 1; convert it to factored form",
                ));
            }
            let report = linear::check_controllability(&sys, &tol)?;
            if !report.controllable() {
                return Err(Error::NotControllable.into());
            }
            let g = linear::compute_gain(&sys, GainAlgorithm::Dual, &tol)?;
            let (a, b) = (sys.a().clone(), sys.b().clone());
            let run = simulate::simulate_coupled(
                |xh, x| Ok(&a * xh + &b * (&g.k * (x - xh))),
                |x| Ok(&a * x),
                &x0,
                &xhat0,
                steps,
                args.track_tol,
            )?;
            (run, n)
        }
    };
    write_run(&run, &args.out)?;
    report_tracking(out, &run, p)
}

fn report_tracking(out: &mut dyn Write, run: &TrackingRun, p: usize) -> CmdResult {
    let residual = run.max_residual_from(p.min(run.reference.steps()));
    let step = run
        .deadbeat_step
        .map_or_else(|| "none".to_string(), |k| k.to_string());
    writeln!(
        out,
        "deadbeat_step: {step} (horizon {p}, max residual from step {p}: {residual:e})"
    )
    .map_err(io_error)?;
    Ok(match run.deadbeat_step {
        Some(k) if k <= p => EXIT_OK,
        _ => EXIT_CHECK_FAILED,
    })
}

fn cmd_demo(args: &DemoArgs, out: &mut dyn Write) -> CmdResult {
    let sys = nonlinear::by_name(&args.name).ok_or_else(|| {
        input_error(format!(
            "unknown demo `{}` (expected homogeneous or positive)",
            args.name
        ))
    })?;
    let (lo, hi) = nonlinear::sample_box(sys.name()).expect("demo systems have a sampling box");
    let mut rng = random::run_rng(args.seed, 0);
    let mut draw = || {
        let v = random::uniform_vector(&mut rng, 3, lo, hi);
        [v[0], v[1], v[2]]
    };
    let x0 = draw();
    let xhat0 = draw();
    let run = simulate::simulate_nonlinear(sys.as_ref(), &x0, &xhat0, args.steps, args.track_tol)?;
    write_run(&run, &args.out)?;
    writeln!(out, "demo: {} (seed {})", sys.name(), args.seed).map_err(io_error)?;
    writeln!(out, "x0: {}  xhat0: {}", fmt_row(x0), fmt_row(xhat0)).map_err(io_error)?;
    report_tracking(out, &run, sys.horizon())
}

fn cmd_batch(args: &BatchArgs, out: &mut dyn Write) -> CmdResult {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = read_text(path).map_err(input_error)?;
            toml::from_str::<BatchConfig>(&text)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?
        }
        None => BatchConfig::default(),
    };
    if let Some(f) = args.family {
        cfg.family = f;
    }
    cfg.count = args.count.unwrap_or(cfg.count);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.n_min = args.n_min.unwrap_or(cfg.n_min);
    cfg.n_max = args.n_max.unwrap_or(cfg.n_max);
    cfg.m_max = args.m_max.unwrap_or(cfg.m_max);
    cfg.horizon = args.steps.or(cfg.horizon);
    cfg.tol = args.track_tol.unwrap_or(cfg.tol);
    cfg.parallel &= !args.serial;

    let summary = simulate::batch_experiment(&cfg)?;
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    writeln!(out, "{text}").map_err(io_error)?;
    Ok(if summary.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_file_round_trip() {
        let text = "n = 2\nm = 1\nA = [0.0, 1.0, -1.0, 0.0]\nB = [1.0, 0.0]\n";
        let file = SystemFile::parse(text).unwrap();
        assert_eq!(file.form, Form::Factored);
        let sys = file.to_system().unwrap();
        assert_eq!(sys.a()[(0, 1)], 1.0);
        assert_eq!(sys.a()[(1, 0)], -1.0);
        assert_eq!(SystemFile::from_system(&sys), file);
    }

    #[test]
    fn system_file_diagnostics_name_the_field() {
        let e =
            SystemFile::parse("n = 2\nm = 1\nA = [1.0, 2.0, 3.0]\nB = [1.0, 0.0]\n").unwrap_err();
        assert!(e.contains("`A`"), "{e}");
        let e = SystemFile::parse("n = 2\nm = 1\nA = [1.0, 2.0, 3.0, 4.0]\n").unwrap_err();
        assert!(e.contains("B"), "{e}");
        let e = SystemFile::parse(
            "n = 2\nm = 1\nform = \"sideways\"\nA = [1.0, 2.0, 3.0, 4.0]\nB = [1.0, 0.0]\n",
        )
        .unwrap_err();
        assert!(e.contains("form") || e.contains("sideways"), "{e}");
    }

    #[test]
    fn matrix_text_reader() {
        let m = parse_matrix_text("# rotation\n0 1\n-1 0\n\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert!(parse_matrix_text("1 2\n3\n")
            .unwrap_err()
            .contains("line 2"));
        assert!(parse_matrix_text("").is_err());
        assert!(parse_matrix_text("1 x\n").is_err());
    }

    #[test]
    fn tol_env_format() {
        let t = parse_tol_env("1e-9").unwrap();
        assert_eq!(t.rank_rel, 1e-9);
        assert_eq!(t.residual_rel, Tolerance::default().residual_rel);
        let t = parse_tol_env("1e-9, 1e-6").unwrap();
        assert_eq!((t.rank_rel, t.residual_rel), (1e-9, 1e-6));
        assert!(parse_tol_env("abc").is_err());
        assert!(parse_tol_env("2").is_err());
        assert!(parse_tol_env("1e-9,1e-9,1e-9").is_err());
    }

    #[test]
    fn vector_flag() {
        assert_eq!(parse_vector("1, -2.5,3").unwrap(), vec![1.0, -2.5, 3.0]);
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("nan").is_err());
    }
}
