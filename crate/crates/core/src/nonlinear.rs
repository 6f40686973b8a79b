//! Two third-order nonlinear plants with hand-derived deadbeat trackers.
//!
//! Both are scalar-input systems of the form `x̂⁺ = f(μ(x̂, u))` with
//! deadbeat horizon 3: the tracker state equals the reference state from
//! step 3 onward, for every pair of initial conditions.
//!
//! * [`HomogeneousSystem`] lives on ℝ³ and is homogeneous under the
//!   dilation `Δ_λ x = (λx₁, λx₂, λ³x₃)`.
//! * [`PositiveSystem`] lives on the open positive orthant.

use crate::error::{Error, Result};

pub type State = [f64; 3];

/// Sign-preserving real cube root.
pub fn real_cbrt(y: f64) -> f64 {
    y.cbrt()
}

fn rel_close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + scale)
}

/// A scalar-input plant `x̂⁺ = f(μ(x̂, u))` with a closed-form deadbeat law.
pub trait ControlledSystem: Send + Sync {
    fn name(&self) -> &'static str;

    fn state_dim(&self) -> usize {
        3
    }

    /// Deadbeat horizon `p`.
    fn horizon(&self) -> usize {
        3
    }

    /// Input `u₀` with `μ(x, u₀) = x`.
    fn neutral_input(&self) -> f64;

    fn in_domain(&self, x: &[f64]) -> bool;

    fn f(&self, x: &State) -> Result<State>;

    fn f_inv(&self, x: &State) -> Result<State>;

    fn mu(&self, x: &State, u: f64) -> Result<State>;

    /// Deadbeat feedback law `κ(x̂, x)`.
    fn kappa(&self, xhat: &State, x: &State) -> Result<f64>;

    /// Closed-form tracker dynamics.
    fn tracker_step(&self, xhat: &State, x: &State) -> Result<State>;

    /// Tracker dynamics by composition, `f(μ(x̂, κ(x̂, x)))`.
    fn composed_step(&self, xhat: &State, x: &State) -> Result<State> {
        let u = self.kappa(xhat, x)?;
        self.f(&self.mu(xhat, u)?)
    }

    /// `z ∈ [center]₀ = μ(center, U)`.
    fn in_base_class(&self, center: &State, z: &State, tol: f64) -> bool;

    /// `z ∈ [x]₋₁⁻ = f⁻¹([f(x)]₋₁)`.
    fn in_minus_class(&self, x: &State, z: &State, tol: f64) -> bool;

    /// Checks that `μ(x̂, κ(x̂, x))` lies in both `[x̂]₀` and `[x]₋₁⁻`.
    fn class_membership_check(&self, xhat: &State, x: &State, tol: f64) -> Result<bool> {
        let z = self.mu(xhat, self.kappa(xhat, x)?)?;
        Ok(self.in_base_class(xhat, &z, tol) && self.in_minus_class(x, &z, tol))
    }
}

/// Looks up a demo system by its CLI name.
pub fn by_name(name: &str) -> Option<Box<dyn ControlledSystem>> {
    match name {
        "homogeneous" => Some(Box::new(HomogeneousSystem)),
        "positive" => Some(Box::new(PositiveSystem)),
        _ => None,
    }
}

/// Sampling box for random initial conditions of the named demo.
pub fn sample_box(name: &str) -> Option<(f64, f64)> {
    match name {
        "homogeneous" => Some((-2.0, 2.0)),
        "positive" => Some((0.5, 2.0)),
        _ => None,
    }
}

/// Weighted scaling `Δ_λ x = (λx₁, λx₂, λ³x₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dilation {
    pub lambda: f64,
}

impl Dilation {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn apply(&self, x: &State) -> State {
        let l = self.lambda;
        [l * x[0], l * x[1], l * l * l * x[2]]
    }
}

// ---------------------------------------------------------------------------

/// `f(x) = (−x₂, x₁ + x₃^{1/3}, x₂³ + x₃)`, `μ(x, u) = (x₁, x₂, x₃ + u³)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HomogeneousSystem;

fn check_finite(x: &State, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "{what} = {x:?} is not finite"
        )))
    }
}

impl HomogeneousSystem {
    /// `x₁ − x̂₁ + x₃^{1/3}`: the third-coordinate cube root of the intersection point.
    fn intersection_root(xhat: &State, x: &State) -> f64 {
        x[0] - xhat[0] + real_cbrt(x[2])
    }
}

impl ControlledSystem for HomogeneousSystem {
    fn name(&self) -> &'static str {
        "homogeneous"
    }

    fn neutral_input(&self) -> f64 {
        0.0
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 3 && x.iter().all(|v| v.is_finite())
    }

    fn f(&self, x: &State) -> Result<State> {
        check_finite(x, "x")?;
        Ok([-x[1], x[0] + real_cbrt(x[2]), x[1].powi(3) + x[2]])
    }

    fn f_inv(&self, x: &State) -> Result<State> {
        check_finite(x, "x")?;
        let s = x[0].powi(3) + x[2];
        Ok([x[1] - real_cbrt(s), -x[0], s])
    }

    fn mu(&self, x: &State, u: f64) -> Result<State> {
        check_finite(x, "x")?;
        Ok([x[0], x[1], x[2] + u.powi(3)])
    }

    fn kappa(&self, xhat: &State, x: &State) -> Result<f64> {
        check_finite(xhat, "xhat")?;
        check_finite(x, "x")?;
        let r = Self::intersection_root(xhat, x);
        Ok(real_cbrt(r.powi(3) - xhat[2]))
    }

    fn tracker_step(&self, xhat: &State, x: &State) -> Result<State> {
        check_finite(xhat, "xhat")?;
        check_finite(x, "x")?;
        let r = Self::intersection_root(xhat, x);
        Ok([
            -xhat[1],
            x[0] + real_cbrt(x[2]),
            xhat[1].powi(3) + r.powi(3),
        ])
    }

    // [c]₀ = {(c₁, c₂, α³)}.
    fn in_base_class(&self, center: &State, z: &State, tol: f64) -> bool {
        rel_close(z[0], center[0], center[0].abs(), tol)
            && rel_close(z[1], center[1], center[1].abs(), tol)
    }

    // [x]₋₁⁻ = {(x₁ + x₃^{1/3} − β, α, β³)}. Compared after cubing, which
    // avoids the unbounded slope of the cube root at zero.
    fn in_minus_class(&self, x: &State, z: &State, tol: f64) -> bool {
        let beta = x[0] + real_cbrt(x[2]) - z[0];
        let cubed = beta.powi(3);
        rel_close(cubed, z[2], cubed.abs().max(z[2].abs()), tol)
    }
}

// ---------------------------------------------------------------------------

/// `f(x) = (x₁x₂x₃, x₃/x₁, √(x₁x₂))`, `μ(x, u) = (x₁/u, x₂u², x₃/u)` on the
/// open positive orthant with `u > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PositiveSystem;

fn check_positive(x: &State, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "{what} = {x:?} is not strictly positive"
        )))
    }
}

impl ControlledSystem for PositiveSystem {
    fn name(&self) -> &'static str {
        "positive"
    }

    fn neutral_input(&self) -> f64 {
        1.0
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 3 && x.iter().all(|v| v.is_finite() && *v > 0.0)
    }

    fn f(&self, x: &State) -> Result<State> {
        check_positive(x, "x")?;
        Ok([x[0] * x[1] * x[2], x[2] / x[0], (x[0] * x[1]).sqrt()])
    }

    fn f_inv(&self, x: &State) -> Result<State> {
        check_positive(x, "x")?;
        let x3sq = x[2] * x[2];
        Ok([x[0] / (x[1] * x3sq), x[1] * x3sq * x3sq / x[0], x[0] / x3sq])
    }

    fn mu(&self, x: &State, u: f64) -> Result<State> {
        check_positive(x, "x")?;
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::DomainViolation(format!(
                "input u = {u} is not positive"
            )));
        }
        Ok([x[0] / u, x[1] * u * u, x[2] / u])
    }

    fn kappa(&self, xhat: &State, x: &State) -> Result<f64> {
        check_positive(xhat, "xhat")?;
        check_positive(x, "x")?;
        let weight = |s: &State| s[0].cbrt() * s[1].powf(5.0 / 3.0) * s[2] * s[2];
        Ok(weight(x) / weight(xhat))
    }

    fn tracker_step(&self, xhat: &State, x: &State) -> Result<State> {
        check_positive(xhat, "xhat")?;
        check_positive(x, "x")?;
        let third = xhat[0].cbrt() * x[0].powf(1.0 / 6.0) * x[1].powf(5.0 / 6.0) * x[2]
            / (xhat[1].cbrt() * xhat[2]);
        Ok([xhat[0] * xhat[1] * xhat[2], xhat[2] / xhat[0], third])
    }

    // [c]₀ = {(c₁/γ, c₂γ², c₃/γ) : γ > 0}.
    fn in_base_class(&self, center: &State, z: &State, tol: f64) -> bool {
        if !self.in_domain(z) || !self.in_domain(center) {
            return false;
        }
        let gamma = center[0] / z[0];
        let z2 = center[1] * gamma * gamma;
        let z3 = center[2] / gamma;
        rel_close(z[1], z2, z2, tol) && rel_close(z[2], z3, z3, tol)
    }

    // [x]₋₁⁻ = {(x₁/(α²β), x₂α⁴/β, x₃β/α³) : α, β > 0}.
    fn in_minus_class(&self, x: &State, z: &State, tol: f64) -> bool {
        if !self.in_domain(z) || !self.in_domain(x) {
            return false;
        }
        let alpha = ((z[1] * x[0]) / (z[0] * x[1])).powf(1.0 / 6.0);
        let beta = x[0] / (alpha * alpha * z[0]);
        let z3 = x[2] * beta / alpha.powi(3);
        rel_close(z[2], z3, z3, tol)
    }
}
