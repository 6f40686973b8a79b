//! Coupled reference/tracker simulation, deadbeat-step detection and seeded
//! batch experiments.
//!
//! The reference evolves autonomously, `x⁺ = f(x)`; the tracker is driven by
//! it, `x̂⁺ = g(x̂, x)`. Convergence is judged with the mixed test
//! `‖x̂ − x‖ ≤ tol·(1 + ‖x‖)`.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{self, GainAlgorithm, LinearSystem, LinearTracker};
use crate::nonlinear::{self, ControlledSystem};
use crate::random::{self, Conditioning};
use crate::subspace::Tolerance;

/// States whose norm exceeds this abort the run.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// Default tolerance for the deadbeat-step test.
pub const DEFAULT_TRACKING_TOL: f64 = 1e-8;

/// Default simulation length for an `n`-dimensional linear plant: twice the
/// guaranteed horizon.
pub fn default_steps(n: usize) -> usize {
    2 * (n + 1)
}

/// States `x(0), …, x(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub dim: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRun {
    pub reference: Trajectory,
    pub tracker: Trajectory,
    /// Smallest `k` from which the tracker matches the reference at every
    /// remaining step.
    pub deadbeat_step: Option<usize>,
    pub tol_used: f64,
}

impl TrackingRun {
    /// `‖ψ(k) − φ(k)‖ / (1 + ‖φ(k)‖)` for every step.
    pub fn residuals(&self) -> Vec<f64> {
        self.reference
            .states
            .iter()
            .zip(&self.tracker.states)
            .map(|(x, xh)| (xh - x).norm() / (1.0 + x.norm()))
            .collect()
    }

    /// Largest residual at steps `k ≥ from`; zero if there are none.
    pub fn max_residual_from(&self, from: usize) -> f64 {
        self.residuals().into_iter().skip(from).fold(0.0, f64::max)
    }

    /// Writes `k,x1..xn,xhat1..xhatn` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.reference.dim;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("xhat{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for (k, (x, xh)) in self
            .reference
            .states
            .iter()
            .zip(&self.tracker.states)
            .enumerate()
        {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().chain(xh.iter()).map(|v| format!("{v:.16e}")));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidInput(format!("cannot write CSV: {e}")))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("cannot write CSV: {e}"))
}

fn within(x: &DVector<f64>, xh: &DVector<f64>, tol: f64) -> bool {
    (xh - x).norm() <= tol * (1.0 + x.norm())
}

/// Smallest `k` such that every step from `k` to the end passes the
/// tolerance test.
pub fn deadbeat_step(reference: &Trajectory, tracker: &Trajectory, tol: f64) -> Option<usize> {
    let pairs: Vec<_> = reference.states.iter().zip(&tracker.states).collect();
    let mut first = None;
    for (k, (x, xh)) in pairs.iter().enumerate().rev() {
        if within(x, xh, tol) {
            first = Some(k);
        } else {
            break;
        }
    }
    first
}

// Domain exits and overflow become a divergence at step `k`; other errors
// (e.g. an uncontrollable system) pass through.
fn guard(k: usize, next: Result<DVector<f64>>) -> Result<DVector<f64>> {
    match next {
        Ok(x) if x.iter().all(|v| v.is_finite()) && x.norm() <= DIVERGENCE_BOUND => Ok(x),
        Ok(_) | Err(Error::DomainViolation(_)) => Err(Error::DivergedAtStep(k)),
        Err(e) => Err(e),
    }
}

/// Iterates `x⁺ = step(x)` for `n_steps` steps.
pub fn simulate_autonomous<F>(mut step: F, x0: &DVector<f64>, n_steps: usize) -> Result<Trajectory>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let x0 = guard(0, Ok(x0.clone()))?;
    let dim = x0.len();
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0);
    for k in 1..=n_steps {
        let next = guard(k, step(&states[k - 1]))?;
        if next.len() != dim {
            return Err(Error::Internal(format!(
                "step changed the state dimension from {dim} to {}",
                next.len()
            )));
        }
        states.push(next);
    }
    Ok(Trajectory { states, dim })
}

/// Advances `x⁺ = f(x)` and `x̂⁺ = tracker(x̂, x)` in lockstep.
pub fn simulate_coupled<T, F>(
    mut tracker: T,
    f: F,
    x0: &DVector<f64>,
    xhat0: &DVector<f64>,
    n_steps: usize,
    tol: f64,
) -> Result<TrackingRun>
where
    T: FnMut(&DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>,
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    if x0.len() != xhat0.len() {
        return Err(Error::InvalidInput(format!(
            "x0 has {} entries but xhat0 has {}",
            x0.len(),
            xhat0.len()
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let reference = simulate_autonomous(f, x0, n_steps)?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(guard(0, Ok(xhat0.clone()))?);
    for k in 1..=n_steps {
        let next = guard(k, tracker(&states[k - 1], &reference.states[k - 1]))?;
        states.push(next);
    }
    let tracker = Trajectory {
        states,
        dim: x0.len(),
    };
    let deadbeat_step = deadbeat_step(&reference, &tracker, tol);
    Ok(TrackingRun {
        reference,
        tracker,
        deadbeat_step,
        tol_used: tol,
    })
}

/// Coupled run of a nonlinear demo plant with its closed-form tracker.
pub fn simulate_nonlinear(
    sys: &dyn ControlledSystem,
    x0: &[f64; 3],
    xhat0: &[f64; 3],
    n_steps: usize,
    tol: f64,
) -> Result<TrackingRun> {
    let to_arr = |v: &DVector<f64>| [v[0], v[1], v[2]];
    let to_vec = |a: [f64; 3]| DVector::from_column_slice(&a);
    simulate_coupled(
        |xh, x| sys.tracker_step(&to_arr(xh), &to_arr(x)).map(to_vec),
        |x| sys.f(&to_arr(x)).map(to_vec),
        &to_vec(*x0),
        &to_vec(*xhat0),
        n_steps,
        tol,
    )
}

/// Coupled run of the set-intersection tracker on a factored-form plant
/// `x⁺ = A x`.
pub fn simulate_linear(
    tracker: &LinearTracker,
    x0: &DVector<f64>,
    xhat0: &DVector<f64>,
    n_steps: usize,
    tol: f64,
) -> Result<TrackingRun> {
    let a = tracker.system().a().clone();
    simulate_coupled(
        |xh, x| tracker.step(xh, x),
        |x| Ok(&a * x),
        x0,
        xhat0,
        n_steps,
        tol,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegulationRun {
    pub trajectory: Trajectory,
    /// First `k` with `‖x(k)‖ ≤ tol·(1 + ‖x(0)‖)`.
    pub first_zero: Option<usize>,
}

/// Simulates `x⁺ = (A − B K) x`.
pub fn regulation_run(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    k: &DMatrix<f64>,
    x0: &DVector<f64>,
    n_steps: usize,
    tol: f64,
) -> Result<RegulationRun> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n || k.nrows() != b.ncols() || k.ncols() != n || x0.len() != n
    {
        return Err(Error::InvalidInput(format!(
            "inconsistent shapes: A {}x{}, B {}x{}, K {}x{}, x0 {}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            k.nrows(),
            k.ncols(),
            x0.len()
        )));
    }
    let closed = a - b * k;
    let trajectory = simulate_autonomous(|x| Ok(&closed * x), x0, n_steps)?;
    let bound = tol * (1.0 + x0.norm());
    let first_zero = trajectory.states.iter().position(|x| x.norm() <= bound);
    Ok(RegulationRun {
        trajectory,
        first_zero,
    })
}

// ---------------------------------------------------------------------------
// Batch experiments

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Scalar-input pairs with invertible `A`: primal gain, regulation.
    ScalarGain,
    /// Scalar-input pairs with rank-deficient `A`: dual gain.
    SingularGain,
    /// Set-intersection tracker on random pairs with `1 ≤ m ≤ m_max`.
    LinearTracker,
    Homogeneous,
    Positive,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ScalarGain,
        Family::SingularGain,
        Family::LinearTracker,
        Family::Homogeneous,
        Family::Positive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ScalarGain => "scalar-gain",
            Family::SingularGain => "singular-gain",
            Family::LinearTracker => "linear-tracker",
            Family::Homogeneous => "homogeneous",
            Family::Positive => "positive",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub family: Family,
    pub count: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub m_max: usize,
    /// Simulation length; `None` means [`default_steps`] (3 → 8 for demos).
    pub horizon: Option<usize>,
    /// Pass threshold for residuals.
    pub tol: f64,
    pub parallel: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            family: Family::ScalarGain,
            count: 100,
            seed: 0,
            n_min: 2,
            n_max: 8,
            m_max: 2,
            horizon: None,
            tol: DEFAULT_TRACKING_TOL,
            parallel: true,
        }
    }
}

impl BatchConfig {
    fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidInput(format!(
                "dimension range {}..={} is empty or starts at zero",
                self.n_min, self.n_max
            )));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidInput("m_max must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub family: Option<Family>,
    pub count: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_residual: f64,
    /// Deadbeat (or first-zero) step → number of runs.
    pub deadbeat_steps: BTreeMap<usize, usize>,
    /// Failure kind → number of runs.
    pub failures: BTreeMap<String, usize>,
}

impl BatchSummary {
    /// Associative merge of two partial summaries.
    pub fn merge(mut self, other: BatchSummary) -> BatchSummary {
        self.family = self.family.or(other.family);
        self.count += other.count;
        self.passed += other.passed;
        self.failed += other.failed;
        self.max_residual = self.max_residual.max(other.max_residual);
        for (k, v) in other.deadbeat_steps {
            *self.deadbeat_steps.entry(k).or_default() += v;
        }
        for (k, v) in other.failures {
            *self.failures.entry(k).or_default() += v;
        }
        self
    }

    fn single(family: Family, outcome: RunOutcome) -> BatchSummary {
        let mut s = BatchSummary {
            family: Some(family),
            count: 1,
            max_residual: outcome.residual,
            ..Default::default()
        };
        if let Some(k) = outcome.step {
            s.deadbeat_steps.insert(k, 1);
        }
        match outcome.failure {
            None => s.passed = 1,
            Some(kind) => {
                s.failed = 1;
                s.failures.insert(kind, 1);
            }
        }
        s
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RunOutcome {
    residual: f64,
    step: Option<usize>,
    failure: Option<String>,
}

impl RunOutcome {
    fn error(e: &Error) -> Self {
        Self {
            residual: 0.0,
            step: None,
            failure: Some(error_kind(e).to_string()),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::NumericalFailure(_) => "numerical-failure",
        Error::SingularA { .. } => "singular-a",
        Error::Uncontrollable(_) => "uncontrollable",
        Error::UnsupportedInputWidth(_) => "unsupported-input-width",
        Error::NotControllable => "not-controllable",
        Error::DomainViolation(_) => "domain-violation",
        Error::DivergedAtStep(_) => "diverged",
        Error::NotNilpotent(_) => "not-nilpotent",
        Error::Internal(_) => "internal",
    }
}

fn pick_dim(rng: &mut rand_chacha::ChaCha8Rng, lo: usize, hi: usize) -> usize {
    use rand::RngExt;
    rng.random_range(lo..=hi)
}

fn run_one(cfg: &BatchConfig, index: u64) -> RunOutcome {
    let mut rng = random::run_rng(cfg.seed, index);
    let tol = Tolerance::default();
    let result = match cfg.family {
        Family::ScalarGain => scalar_gain_run(cfg, &mut rng, &tol),
        Family::SingularGain => singular_gain_run(cfg, &mut rng, &tol),
        Family::LinearTracker => linear_tracker_run(cfg, &mut rng, &tol),
        Family::Homogeneous => nonlinear_run(cfg, &mut rng, &nonlinear::HomogeneousSystem),
        Family::Positive => nonlinear_run(cfg, &mut rng, &nonlinear::PositiveSystem),
    };
    result.unwrap_or_else(|e| RunOutcome::error(&e))
}

fn generation_failure() -> Error {
    Error::NumericalFailure("no well-conditioned system drawn".into())
}

fn scalar_gain_run(
    cfg: &BatchConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: &Tolerance,
) -> Result<RunOutcome> {
    let n = pick_dim(rng, cfg.n_min, cfg.n_max);
    let sys = random::controllable_pair(rng, n, 1, &Conditioning::default())
        .ok_or_else(generation_failure)?;
    let gain = linear::deadbeat_gain(&sys, tol)?;
    let x0 = random::gaussian_vector(rng, n);
    let steps = cfg.horizon.unwrap_or(default_steps(n));
    let reg = regulation_run(sys.a(), sys.b(), &gain.k, &x0, steps, cfg.tol)?;
    let failure = if gain.nilpotency_residual > cfg.tol {
        Some("residual".to_string())
    } else if reg.first_zero.is_none_or(|k| k > n) {
        Some("late-regulation".to_string())
    } else {
        None
    };
    Ok(RunOutcome {
        residual: gain.nilpotency_residual,
        step: reg.first_zero,
        failure,
    })
}

fn singular_gain_run(
    cfg: &BatchConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: &Tolerance,
) -> Result<RunOutcome> {
    let n = pick_dim(rng, cfg.n_min.max(2), cfg.n_max.max(2));
    let sys = random::singular_pair(rng, n, Conditioning::default().min_reach_ratio)
        .ok_or_else(generation_failure)?;
    let gain = linear::compute_gain(&sys, GainAlgorithm::Dual, tol)?;
    let x0 = random::gaussian_vector(rng, n);
    let steps = cfg.horizon.unwrap_or(default_steps(n));
    let reg = regulation_run(sys.a(), sys.b(), &gain.k, &x0, steps, cfg.tol)?;
    let primal_refused = matches!(
        linear::deadbeat_gain(&sys, tol),
        Err(Error::SingularA { .. })
    );
    let failure = if gain.nilpotency_residual > cfg.tol {
        Some("residual".to_string())
    } else if !primal_refused {
        Some("primal-accepted-singular".to_string())
    } else if reg.first_zero.is_none_or(|k| k > n) {
        Some("late-regulation".to_string())
    } else {
        None
    };
    Ok(RunOutcome {
        residual: gain.nilpotency_residual,
        step: reg.first_zero,
        failure,
    })
}

fn linear_tracker_run(
    cfg: &BatchConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: &Tolerance,
) -> Result<RunOutcome> {
    let n = pick_dim(rng, cfg.n_min, cfg.n_max);
    let m = pick_dim(rng, 1, cfg.m_max.min(n));
    let sys: LinearSystem = random::controllable_pair(rng, n, m, &Conditioning::default())
        .ok_or_else(generation_failure)?;
    let tracker = LinearTracker::from_system(&sys, tol)?;
    let x0 = random::gaussian_vector(rng, n);
    let xhat0 = random::gaussian_vector(rng, n);
    let steps = cfg.horizon.unwrap_or(default_steps(n));
    let run = simulate_linear(&tracker, &x0, &xhat0, steps, cfg.tol)?;
    let p = tracker.horizon();
    Ok(tracking_outcome(&run, p, steps))
}

fn nonlinear_run(
    cfg: &BatchConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    sys: &dyn ControlledSystem,
) -> Result<RunOutcome> {
    let (lo, hi) = nonlinear::sample_box(sys.name()).expect("demo systems have a sampling box");
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let v = random::uniform_vector(rng, 3, lo, hi);
        [v[0], v[1], v[2]]
    };
    let x0 = draw(rng);
    let xhat0 = draw(rng);
    let steps = cfg.horizon.unwrap_or(default_steps(2));
    let run = simulate_nonlinear(sys, &x0, &xhat0, steps, cfg.tol)?;
    Ok(tracking_outcome(&run, sys.horizon(), steps))
}

fn tracking_outcome(run: &TrackingRun, p: usize, steps: usize) -> RunOutcome {
    let residual = run.max_residual_from(p.min(steps));
    let failure = match run.deadbeat_step {
        Some(k) if k <= p => None,
        _ => Some("late-tracking".to_string()),
    };
    RunOutcome {
        residual,
        step: run.deadbeat_step,
        failure,
    }
}

/// Runs `cfg.count` seeded experiments. Run `i` draws from its own RNG
/// stream, so the summary does not depend on scheduling.
pub fn batch_experiment(cfg: &BatchConfig) -> Result<BatchSummary> {
    cfg.validate()?;
    let one = |i: usize| BatchSummary::single(cfg.family, run_one(cfg, i as u64));
    let empty = BatchSummary {
        family: Some(cfg.family),
        ..Default::default()
    };
    let summary = if cfg.parallel {
        (0..cfg.count)
            .into_par_iter()
            .map(one)
            .reduce(BatchSummary::default, BatchSummary::merge)
    } else {
        (0..cfg.count)
            .map(one)
            .fold(BatchSummary::default(), BatchSummary::merge)
    };
    Ok(empty.merge(summary))
}
