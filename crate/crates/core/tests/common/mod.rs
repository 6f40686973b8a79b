//! Shared oracles and property checks for the integration tests.
//!
//! Everything here is computed independently of the crate's own algorithms:
//! the Ackermann gain goes through the reachability matrix and an LU solve,
//! and the subspace properties are stated in terms of projectors.

#![allow(dead_code)]

use deadbeat::subspace::{self, Subspace, Tolerance};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// Ackermann's formula for placing all closed-loop poles of `x⁺ = (A − BK)x`
/// at the origin: `K = eₙᵀ C⁻¹ Aⁿ` with `C = [B AB … Aⁿ⁻¹B]`.
pub fn ackermann_gain(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut c = DMatrix::zeros(n, n);
    let mut col = b.clone();
    for k in 0..n {
        c.set_column(k, &col);
        col = a * col;
    }
    let mut e_n = DVector::zeros(n);
    e_n[n - 1] = 1.0;
    // Row vector eₙᵀ C⁻¹ = (C⁻ᵀ eₙ)ᵀ.
    let y = c.transpose().lu().solve(&e_n)?;
    let a_n = (0..n).fold(DMatrix::identity(n, n), |acc, _| acc * a);
    let k = y.transpose() * a_n;
    Some(DMatrix::from_row_slice(1, n, k.as_slice()))
}

/// `‖a − b‖_F / ‖b‖_F`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Orthogonal projector onto the span of the columns of `basis`.
pub fn projector(s: &Subspace) -> DMatrix<f64> {
    s.basis() * s.basis().transpose()
}

/// Projector distance, a basis-independent comparison of subspaces.
pub fn subspace_gap(s: &Subspace, t: &Subspace) -> f64 {
    (projector(s) - projector(t)).abs().max()
}

fn orthonormality_error(s: &Subspace) -> f64 {
    let b = s.basis();
    (b.transpose() * b - DMatrix::identity(b.ncols(), b.ncols()))
        .abs()
        .max()
}

// ---------------------------------------------------------------------------
// Strategies

/// Ambient dimension and a matrix of prescribed rank, built as `G H` with
/// well-scaled Gaussian-like factors.
pub fn ranked_matrix(n: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (0..=n.min(cols)).prop_flat_map(move |r| {
        (
            prop::collection::vec(-1.0f64..1.0, n * r),
            prop::collection::vec(-1.0f64..1.0, r * cols),
        )
            .prop_map(move |(g, h)| DMatrix::from_vec(n, r, g) * DMatrix::from_vec(r, cols, h))
    })
}

pub fn subspace_in(n: usize) -> impl Strategy<Value = Subspace> {
    (1..=n)
        .prop_flat_map(move |cols| ranked_matrix(n, cols))
        .prop_map(|m| subspace::column_space(&m, &Tolerance::default()).expect("finite input"))
}

/// An `n × n` matrix that is singular about a third of the time.
pub fn square_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop_oneof![
        2 => prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v)),
        1 => ranked_matrix(n, n),
    ]
}

pub fn pair_of_subspaces() -> impl Strategy<Value = (Subspace, Subspace)> {
    (1usize..=8).prop_flat_map(|n| (subspace_in(n), subspace_in(n)))
}

pub fn matrix_and_subspace() -> impl Strategy<Value = (DMatrix<f64>, Subspace)> {
    (1usize..=8).prop_flat_map(|n| (square_matrix(n), subspace_in(n)))
}

// ---------------------------------------------------------------------------
// Properties. Each returns an error describing the first violation.

const GAP_TOL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-10;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn ok<T>(r: deadbeat::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// `(S + T)⊥ = S⊥ ∩ T⊥`, with every produced basis orthonormal.
pub fn duality(s: &Subspace, t: &Subspace) -> Result<(), TestCaseError> {
    let tol = Tolerance::default();
    let lhs = ok(subspace::complement(&ok(subspace::sum(s, t, &tol))?, &tol))?;
    let rhs = ok(subspace::intersect(
        &ok(subspace::complement(s, &tol))?,
        &ok(subspace::complement(t, &tol))?,
        &tol,
    ))?;
    for x in [&lhs, &rhs] {
        check(orthonormality_error(x) <= ORTHO_TOL, || {
            format!("basis not orthonormal: {}", orthonormality_error(x))
        })?;
    }
    check(
        lhs.dim() == rhs.dim() && subspace_gap(&lhs, &rhs) <= GAP_TOL,
        || {
            format!(
                "duality: dims {} vs {}, gap {:e}",
                lhs.dim(),
                rhs.dim(),
                subspace_gap(&lhs, &rhs)
            )
        },
    )
}

/// `(A⁻¹S)⊥ = ℛ(Aᵀ S⊥)` and `ker A ⊆ A⁻¹S`.
pub fn preimage_identity(a: &DMatrix<f64>, s: &Subspace) -> Result<(), TestCaseError> {
    let tol = Tolerance::default();
    let pre = ok(subspace::preimage(a, s, &tol))?;
    let lhs = ok(subspace::complement(&pre, &tol))?;
    let s_perp = ok(subspace::complement(s, &tol))?;
    let rhs = ok(subspace::column_space(
        &(a.transpose() * s_perp.basis()),
        &tol,
    ))?;
    check(
        lhs.dim() == rhs.dim() && subspace_gap(&lhs, &rhs) <= GAP_TOL,
        || {
            format!(
                "preimage duality: dims {} vs {}, gap {:e}",
                lhs.dim(),
                rhs.dim(),
                subspace_gap(&lhs, &rhs)
            )
        },
    )?;
    // Every vector of pre maps into S.
    let image = a * pre.basis();
    let p = projector(s);
    let miss = (&image - &p * &image).abs().max();
    check(miss <= GAP_TOL * (1.0 + a.norm()), || {
        format!("A·preimage leaves S by {miss:e}")
    })?;
    let ker = ok(subspace::null_space(a, &tol))?;
    let outside = (ker.basis() - projector(&pre) * ker.basis()).abs().max();
    check(ker.dim() == 0 || outside <= GAP_TOL, || {
        format!("null space not inside preimage: {outside:e}")
    })
}

/// `dim(S + T) + dim(S ∩ T) = dim S + dim T`.
pub fn dimension_formula(s: &Subspace, t: &Subspace) -> Result<(), TestCaseError> {
    let tol = Tolerance::default();
    let sum = ok(subspace::sum(s, t, &tol))?;
    let cap = ok(subspace::intersect(s, t, &tol))?;
    check(sum.dim() + cap.dim() == s.dim() + t.dim(), || {
        format!(
            "dim(S+T) + dim(S∩T) = {} + {} but dim S + dim T = {} + {}",
            sum.dim(),
            cap.dim(),
            s.dim(),
            t.dim()
        )
    })
}

/// Identical inputs give bitwise-identical bases.
pub fn determinism(a: &DMatrix<f64>, s: &Subspace, t: &Subspace) -> Result<(), TestCaseError> {
    let tol = Tolerance::default();
    let twice = |f: &dyn Fn() -> deadbeat::Result<Subspace>| -> Result<(), TestCaseError> {
        let (x, y) = (ok(f())?, ok(f())?);
        check(
            x.basis().as_slice().iter().map(|v| v.to_bits()).eq(y
                .basis()
                .as_slice()
                .iter()
                .map(|v| v.to_bits())),
            || "repeated call gave a different basis".into(),
        )
    };
    twice(&|| subspace::sum(s, t, &tol))?;
    twice(&|| subspace::intersect(s, t, &tol))?;
    twice(&|| subspace::complement(s, &tol))?;
    twice(&|| subspace::preimage(a, s, &tol))?;
    twice(&|| subspace::null_space(a, &tol))?;
    twice(&|| subspace::column_space(a, &tol))
}
