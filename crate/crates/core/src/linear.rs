//! Deadbeat analysis and synthesis for linear systems.
//!
//! Two plant forms are supported:
//!
//! * [`Form::Standard`]: `x̂⁺ = A x̂ + B u`
//! * [`Form::Factored`]: `x̂⁺ = A (x̂ + B u)`
//!
//! The factored form is the one the set construction works with: its input
//! map is `μ(x, u) = x + B u`, so the level-0 class of a state is
//! `x + ℛ(B)`. A gain `K₂` for the factored form converts to the standard
//! form gain `K = K₂ A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{self, AffineSet, Subspace, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Standard,
    #[default]
    Factored,
}

/// A pair `(A, B)` with `A` square `n × n` and `B` of shape `n × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    form: Form,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, form: Form) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "B must be {}xm with m >= 1, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("A or B has non-finite entries".into()));
        }
        Ok(Self { a, b, form })
    }

    pub fn factored(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        Self::new(a, b, Form::Factored)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }
}

/// Rotation of the plane by `theta`: `[[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

// ---------------------------------------------------------------------------
// Controllability
// ---------------------------------------------------------------------------

/// Outcome of the eigenvalue rank test.
#[derive(Debug, Clone, PartialEq)]
pub struct PbhVerdict {
    pub pass: bool,
    /// First nonzero eigenvalue at which `[A − λI  B]` loses rank, as `(re, im)`.
    pub failing_eigenvalue: Option<(f64, f64)>,
}

/// Combined report of both controllability tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub pbh_pass: bool,
    pub geometric_pass: bool,
    pub chain_dims: Vec<usize>,
    pub failing_eigenvalue: Option<(f64, f64)>,
}

impl ControllabilityReport {
    pub fn controllable(&self) -> bool {
        self.pbh_pass && self.geometric_pass
    }
}

/// Eigenvalues of a square matrix as `(re, im)` pairs.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::InvalidInput(
            "eigenvalues need a square matrix".into(),
        ));
    }
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| (z.re, z.im)).collect())
        .map_err(|e| Error::NumericalFailure(format!("eigenvalue iteration failed: {e:?}")))
}

/// `rank [A − λI  B] = n` for every eigenvalue `λ` of `A` with
/// `|λ| > rank_rel ‖A‖_F`.
///
/// The complex compound is realized as the real matrix
/// `[[Mr, −Mi], [Mi, Mr]]`, whose rank is twice the complex rank.
pub fn pbh_test(sys: &LinearSystem, tol: &Tolerance) -> Result<PbhVerdict> {
    let n = sys.state_dim();
    let m = sys.input_dim();
    let cutoff = tol.rank_rel * sys.a.norm();
    for (re, im) in eigenvalues(&sys.a)? {
        if re.hypot(im) <= cutoff {
            continue;
        }
        let mut real = DMatrix::zeros(2 * n, 2 * (n + m));
        let shifted = &sys.a - DMatrix::identity(n, n) * re;
        let imag = DMatrix::<f64>::identity(n, n) * (-im);
        real.view_mut((0, 0), (n, n)).copy_from(&shifted);
        real.view_mut((0, n), (n, m)).copy_from(&sys.b);
        real.view_mut((0, n + m), (n, n)).copy_from(&(-&imag));
        real.view_mut((n, 0), (n, n)).copy_from(&imag);
        real.view_mut((n, n + m), (n, n)).copy_from(&shifted);
        real.view_mut((n, 2 * n + m), (n, m)).copy_from(&sys.b);
        if subspace::rank(&real, tol)? < 2 * n {
            return Ok(PbhVerdict {
                pass: false,
                failing_eigenvalue: Some((re, im)),
            });
        }
    }
    Ok(PbhVerdict {
        pass: true,
        failing_eigenvalue: None,
    })
}

/// The nested chain `S₀ = ℛ(B)`, `S₋ₖ₋₁ = A⁻¹S₋ₖ + S₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceChain {
    levels: Vec<Subspace>,
    stabilized_at: Option<usize>,
}

impl SubspaceChain {
    /// `levels()[k]` is `S₋ₖ`.
    pub fn levels(&self) -> &[Subspace] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&Subspace> {
        self.levels.get(k)
    }

    /// First `k` with `S₋ₖ₋₁ = S₋ₖ`, if reached within the computed levels.
    pub fn stabilized_at(&self) -> Option<usize> {
        self.stabilized_at
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Subspace::dim).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Deadbeat horizon `p = stabilized_at + 1` when the chain reaches ℝⁿ.
    pub fn horizon(&self) -> Option<usize> {
        let s = self.stabilized_at?;
        self.levels[s].is_full().then_some(s + 1)
    }
}

/// Computes `S₀, S₋₁, …, S₋ₖₘₐₓ`. Once two consecutive levels coincide the
/// remaining levels are copies, since each level is a function of the previous one.
pub fn subspace_chain(sys: &LinearSystem, kmax: usize, tol: &Tolerance) -> Result<SubspaceChain> {
    let s0 = subspace::column_space(&sys.b, tol)?;
    let mut levels = Vec::with_capacity(kmax + 1);
    levels.push(s0.clone());
    let mut stabilized_at = None;
    for k in 0..kmax {
        let next = if stabilized_at.is_some() {
            levels[k].clone()
        } else {
            let pre = subspace::preimage(&sys.a, &levels[k], tol)?;
            let next = subspace::sum(&pre, &s0, tol)?;
            if subspace::equal(&next, &levels[k], tol) {
                stabilized_at = Some(k);
                levels[k].clone()
            } else {
                next
            }
        };
        levels.push(next);
    }
    Ok(SubspaceChain {
        levels,
        stabilized_at,
    })
}

/// `dim S₋ₙ = n`.
pub fn geometric_controllable(sys: &LinearSystem, tol: &Tolerance) -> Result<bool> {
    let n = sys.state_dim();
    let chain = subspace_chain(sys, n, tol)?;
    Ok(chain.levels[n].is_full())
}

/// Runs both tests. They are equivalent, so disagreement is reported as
/// [`Error::Internal`].
pub fn check_controllability(sys: &LinearSystem, tol: &Tolerance) -> Result<ControllabilityReport> {
    let n = sys.state_dim();
    let pbh = pbh_test(sys, tol)?;
    let chain = subspace_chain(sys, n, tol)?;
    let geometric_pass = chain.levels[n].is_full();
    if pbh.pass != geometric_pass {
        return Err(Error::Internal(format!(
            "eigenvalue test says {} but subspace chain says {} (dims {:?})",
            pbh.pass,
            geometric_pass,
            chain.dims()
        )));
    }
    Ok(ControllabilityReport {
        pbh_pass: pbh.pass,
        geometric_pass,
        chain_dims: chain.dims(),
        failing_eigenvalue: pbh.failing_eigenvalue,
    })
}

// ---------------------------------------------------------------------------
// Scalar-input deadbeat gains
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainAlgorithm {
    /// Forward recursion through `A⁻¹`; needs invertible `A`.
    Primal,
    /// Recursion on orthogonal complements through `Aᵀ`; works for singular `A`.
    Dual,
}

/// Deadbeat gains for both plant forms plus the nilpotency residual of the
/// factored closed loop `A (I − B K₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    pub k2: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub nilpotency_residual: f64,
}

/// `‖Mⁿ‖₂ / max(1, ‖M‖₂ⁿ)`, a value in `[0, 1]`. Zero for nilpotent `M`
/// up to rounding, one for the identity.
pub fn verify_nilpotent(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "nilpotency check needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut power = DMatrix::identity(n, n);
    for _ in 0..n {
        power = &power * m;
    }
    let spectral = |x: &DMatrix<f64>| -> Result<f64> {
        Ok(subspace::singular_values(x)?
            .first()
            .copied()
            .unwrap_or(0.0))
    };
    let scale = spectral(m)?.powi(n as i32).max(1.0);
    Ok(spectral(&power)? / scale)
}

/// `K = K₂ A`: factored-form gain to standard-form gain.
pub fn convert_gain(k2: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if k2.ncols() != a.nrows() || !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "cannot multiply {}x{} gain by {}x{} matrix",
            k2.nrows(),
            k2.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(k2 * a)
}

/// `A (I − B K₂)`.
pub fn factored_closed_loop(sys: &LinearSystem, k2: &DMatrix<f64>) -> DMatrix<f64> {
    let n = sys.state_dim();
    &sys.a * (DMatrix::identity(n, n) - &sys.b * k2)
}

fn require_scalar_input(sys: &LinearSystem) -> Result<()> {
    match sys.input_dim() {
        1 => Ok(()),
        m => Err(Error::UnsupportedInputWidth(m)),
    }
}

/// Normalizes `w` against `B` into `K₂ = wᵀ / (wᵀ B)`.
fn gain_from_normal(w: &DVector<f64>, b: &DVector<f64>, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let denom = w.dot(b);
    if denom.abs() <= tol.residual_rel * w.norm() * b.norm() {
        return Err(Error::Uncontrollable(
            "B lies in the last chain hyperplane".into(),
        ));
    }
    Ok(DMatrix::from_row_slice(1, w.len(), (w / denom).as_slice()))
}

fn scalar_state_gain(sys: &LinearSystem, tol: &Tolerance) -> Result<GainResult> {
    let b = sys.b[(0, 0)];
    if b.abs() <= tol.rank_rel * (1.0 + sys.a[(0, 0)].abs()) {
        return Err(Error::Uncontrollable("B = 0".into()));
    }
    let k2 = DMatrix::from_element(1, 1, 1.0 / b);
    let k = DMatrix::from_element(1, 1, sys.a[(0, 0)] / b);
    finish_gain(sys, k2, k, tol)
}

fn finish_gain(
    sys: &LinearSystem,
    k2: DMatrix<f64>,
    k: DMatrix<f64>,
    tol: &Tolerance,
) -> Result<GainResult> {
    let nilpotency_residual = verify_nilpotent(&factored_closed_loop(sys, &k2))?;
    if nilpotency_residual.is_nan() || nilpotency_residual > tol.residual_rel {
        return Err(Error::NotNilpotent(nilpotency_residual));
    }
    Ok(GainResult {
        k2,
        k,
        nilpotency_residual,
    })
}

/// Deadbeat gain by forward recursion.
///
/// Starting from `X = ℛ(B)` it forms `X ← [A⁻¹X  B]` `n − 2` times; the
/// normal `w` of `A⁻¹X` gives `K₂ = wᵀ / (wᵀ B)` and `K = K₂ A`. `X` is
/// re-orthonormalized each pass, which leaves its span unchanged.
pub fn deadbeat_gain(sys: &LinearSystem, tol: &Tolerance) -> Result<GainResult> {
    require_scalar_input(sys)?;
    let n = sys.state_dim();
    if n == 1 {
        return scalar_state_gain(sys, tol);
    }
    let sigma = subspace::singular_values(&sys.a)?;
    let ratio = sigma[n - 1] / sigma[0].max(f64::MIN_POSITIVE);
    if ratio <= tol.rank_rel {
        return Err(Error::SingularA { ratio });
    }
    let lu = sys.a.clone().lu();
    let inv_apply = |x: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        lu.solve(x).ok_or(Error::SingularA { ratio })
    };

    let mut x = subspace::column_space(&sys.b, tol)?.basis().clone();
    for _ in 0..n.saturating_sub(2) {
        let pulled = inv_apply(&x)?;
        let mut next = DMatrix::zeros(n, pulled.ncols() + 1);
        next.columns_mut(0, pulled.ncols()).copy_from(&pulled);
        next.set_column(pulled.ncols(), &sys.b.column(0));
        x = subspace::column_space(&next, tol)?.basis().clone();
    }
    let pulled = inv_apply(&x)?;
    let normal = subspace::null_space(&pulled.transpose(), tol)?;
    if normal.dim() != 1 {
        return Err(Error::Uncontrollable(format!(
            "normal space of A^-1 X has dimension {} (expected 1)",
            normal.dim()
        )));
    }
    let w = normal.basis().column(0).into_owned();
    let k2 = gain_from_normal(&w, &sys.b.column(0).into_owned(), tol)?;
    let k = convert_gain(&k2, &sys.a)?;
    finish_gain(sys, k2, k, tol)
}

/// Deadbeat gain by the dual recursion on complements.
///
/// `X⊥ = 𝒩(Bᵀ)`, then `n − 2` times `X⊥ ← 𝒩([𝒩((AᵀX⊥)ᵀ)  B]ᵀ)`; finally
/// `K₂ = (AᵀX⊥)ᵀ / ((AᵀX⊥)ᵀ B)`. Only `Aᵀ` is applied, never `A⁻¹`.
pub fn deadbeat_gain_dual(sys: &LinearSystem, tol: &Tolerance) -> Result<GainResult> {
    require_scalar_input(sys)?;
    let n = sys.state_dim();
    if n == 1 {
        return scalar_state_gain(sys, tol);
    }
    let at = sys.a.transpose();
    let mut perp = subspace::null_space(&sys.b.transpose(), tol)?;
    for _ in 0..n.saturating_sub(2) {
        if perp.is_zero() {
            return Err(Error::Uncontrollable("complement vanished early".into()));
        }
        let pushed = &at * perp.basis();
        let pre = subspace::null_space(&pushed.transpose(), tol)?;
        let mut stacked = DMatrix::zeros(n, pre.dim() + 1);
        stacked.columns_mut(0, pre.dim()).copy_from(pre.basis());
        stacked.set_column(pre.dim(), &sys.b.column(0));
        perp = subspace::null_space(&stacked.transpose(), tol)?;
    }
    if perp.dim() != 1 {
        return Err(Error::Uncontrollable(format!(
            "final complement has dimension {} (expected 1)",
            perp.dim()
        )));
    }
    let w = &at * perp.basis().column(0);
    let k2 = gain_from_normal(&w, &sys.b.column(0).into_owned(), tol)?;
    let k = convert_gain(&k2, &sys.a)?;
    finish_gain(sys, k2, k, tol)
}

pub fn compute_gain(
    sys: &LinearSystem,
    algo: GainAlgorithm,
    tol: &Tolerance,
) -> Result<GainResult> {
    match algo {
        GainAlgorithm::Primal => deadbeat_gain(sys, tol),
        GainAlgorithm::Dual => deadbeat_gain_dual(sys, tol),
    }
}

// ---------------------------------------------------------------------------
// Classes and the set-intersection tracker
// ---------------------------------------------------------------------------

fn check_state(sys: &LinearSystem, x: &DVector<f64>, what: &str) -> Result<()> {
    if x.len() != sys.state_dim() {
        return Err(Error::InvalidInput(format!(
            "{what} has length {}, expected {}",
            x.len(),
            sys.state_dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )));
    }
    Ok(())
}

/// `[x]₋ₖ = x + S₋ₖ`.
pub fn class_at_level(x: &DVector<f64>, k: usize, chain: &SubspaceChain) -> Result<AffineSet> {
    let level = chain.level(k).ok_or_else(|| {
        Error::InvalidInput(format!("level {k} outside chain of length {}", chain.len()))
    })?;
    AffineSet::new(x.clone(), level.clone())
}

/// `[x]ⱼ⁻` for signed level `j`: `j = 1` is the singleton `{x}`, and
/// `j = −k ≤ 0` is `x + A⁻¹S₋ₖ`.
pub fn minus_class_at_level(
    x: &DVector<f64>,
    level: i32,
    sys: &LinearSystem,
    chain: &SubspaceChain,
    tol: &Tolerance,
) -> Result<AffineSet> {
    check_state(sys, x, "x")?;
    match level {
        1 => Ok(AffineSet::singleton(x.clone())),
        j if j <= 0 => {
            let k = (-j) as usize;
            let s = chain.level(k).ok_or_else(|| {
                Error::InvalidInput(format!("level {j} outside chain of length {}", chain.len()))
            })?;
            AffineSet::new(x.clone(), subspace::preimage(&sys.a, s, tol)?)
        }
        j => Err(Error::InvalidInput(format!("level {j} above 1"))),
    }
}

/// Tracker for the factored form, caching the preimages `A⁻¹S₋ₖ`.
#[derive(Debug, Clone)]
pub struct LinearTracker {
    sys: LinearSystem,
    base: Subspace,
    minus_dirs: Vec<Subspace>,
    tol: Tolerance,
}

impl LinearTracker {
    /// Builds the tracker from a chain that has stabilized at ℝⁿ.
    pub fn new(sys: &LinearSystem, chain: &SubspaceChain, tol: &Tolerance) -> Result<Self> {
        if sys.form() != Form::Factored {
            return Err(Error::InvalidInput(
                "the set-intersection tracker needs a factored-form system".into(),
            ));
        }
        let p = chain.horizon().ok_or(Error::NotControllable)?;
        let minus_dirs = chain.levels[..p - 1]
            .iter()
            .map(|s| subspace::preimage(&sys.a, s, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sys: sys.clone(),
            base: chain.levels[0].clone(),
            minus_dirs,
            tol: *tol,
        })
    }

    /// Convenience constructor computing the chain to depth `n`.
    pub fn from_system(sys: &LinearSystem, tol: &Tolerance) -> Result<Self> {
        let chain = subspace_chain(sys, sys.state_dim(), tol)?;
        Self::new(sys, &chain, tol)
    }

    pub fn system(&self) -> &LinearSystem {
        &self.sys
    }

    /// Deadbeat horizon `p`.
    pub fn horizon(&self) -> usize {
        self.minus_dirs.len() + 1
    }

    /// Highest level `j ∈ {2 − p, …, 0, 1}` with `[x̂]₀ ∩ [x]ⱼ⁻ ≠ ∅`, together
    /// with that intersection.
    pub fn pi_with_intersection(
        &self,
        xhat: &DVector<f64>,
        x: &DVector<f64>,
    ) -> Result<(i32, AffineSet)> {
        check_state(&self.sys, xhat, "xhat")?;
        check_state(&self.sys, x, "x")?;
        let base = AffineSet::new(xhat.clone(), self.base.clone())?;
        let top = AffineSet::singleton(x.clone());
        if let Some(hit) = subspace::affine_intersect(&base, &top, &self.tol)? {
            return Ok((1, hit));
        }
        for (k, dir) in self.minus_dirs.iter().enumerate() {
            let minus = AffineSet::new(x.clone(), dir.clone())?;
            if let Some(hit) = subspace::affine_intersect(&base, &minus, &self.tol)? {
                return Ok((-(k as i32), hit));
            }
        }
        Err(Error::NotControllable)
    }

    pub fn pi_level(&self, xhat: &DVector<f64>, x: &DVector<f64>) -> Result<i32> {
        self.pi_with_intersection(xhat, x).map(|(j, _)| j)
    }

    /// `x̂⁺ = A z` with `z` the minimum-norm point of `[x̂]₀ ∩ [x]⁻_π`.
    pub fn step(&self, xhat: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (_, hit) = self.pi_with_intersection(xhat, x)?;
        Ok(&self.sys.a * hit.point())
    }
}

/// `π(x̂, x)`.
pub fn pi_level(
    xhat: &DVector<f64>,
    x: &DVector<f64>,
    sys: &LinearSystem,
    chain: &SubspaceChain,
    tol: &Tolerance,
) -> Result<i32> {
    LinearTracker::new(sys, chain, tol)?.pi_level(xhat, x)
}

/// One step of the set-intersection deadbeat tracker.
pub fn linear_tracker_step(
    xhat: &DVector<f64>,
    x: &DVector<f64>,
    sys: &LinearSystem,
    chain: &SubspaceChain,
    tol: &Tolerance,
) -> Result<DVector<f64>> {
    LinearTracker::new(sys, chain, tol)?.step(xhat, x)
}

/// Gain-based tracker step for the factored form, `A (x̂ + B K₂ (x − x̂))`.
pub fn gain_tracker_step(
    sys: &LinearSystem,
    k2: &DMatrix<f64>,
    xhat: &DVector<f64>,
    x: &DVector<f64>,
) -> DVector<f64> {
    &sys.a * (xhat + &sys.b * (k2 * (x - xhat)))
}
