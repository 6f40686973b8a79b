//! Numerical subspace algebra over ℝⁿ.
//!
//! Every [`Subspace`] is stored as an orthonormal basis obtained from a
//! singular value decomposition. Rank decisions use a relative cutoff
//! (`rank_rel × σ_max`) and every basis column is sign-normalized so that
//! its first largest-magnitude entry is positive. Identical inputs therefore
//! give bitwise-identical bases.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Relative residual bound for consistency and membership tests.
    pub residual_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            residual_rel: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_rel: f64) -> Result<Self> {
        for (name, v) in [("rank_rel", rank_rel), ("residual_rel", residual_rel)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            rank_rel,
            residual_rel,
        })
    }
}

/// A linear subspace of ℝⁿ held as an `n × d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// The zero subspace `{0}` of ℝⁿ.
    pub fn zero(n: usize) -> Self {
        Self {
            basis: DMatrix::zeros(n, 0),
        }
    }

    /// All of ℝⁿ, with the identity as basis.
    pub fn full(n: usize) -> Self {
        Self {
            basis: DMatrix::identity(n, n),
        }
    }

    /// Wraps a basis that is already orthonormal. Fails if it is not.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        check_finite(&basis)?;
        let d = basis.ncols();
        if d > basis.nrows() {
            return Err(Error::InvalidInput(format!(
                "{d} basis columns exceed ambient dimension {}",
                basis.nrows()
            )));
        }
        let gram = basis.transpose() * &basis;
        let dev = (gram - DMatrix::<f64>::identity(d, d)).amax();
        if dev > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "basis columns are not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.is_zero() {
            return DVector::zeros(x.len());
        }
        &self.basis * (self.basis.transpose() * x)
    }
}

/// A translate `point + direction`, kept in canonical form: `point` is the
/// minimum-norm element, i.e. orthogonal to `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSet {
    point: DVector<f64>,
    direction: Subspace,
}

impl AffineSet {
    pub fn new(point: DVector<f64>, direction: Subspace) -> Result<Self> {
        if point.len() != direction.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "point has length {} but direction lives in R^{}",
                point.len(),
                direction.ambient_dim()
            )));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("point has non-finite entries".into()));
        }
        let point = &point - direction.project(&point);
        Ok(Self { point, direction })
    }

    /// The singleton `{x}`.
    pub fn singleton(x: DVector<f64>) -> Self {
        let n = x.len();
        Self {
            point: x,
            direction: Subspace::zero(n),
        }
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.point
    }

    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn ambient_dim(&self) -> usize {
        self.point.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.direction.is_zero()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: &Tolerance) -> bool {
        x.len() == self.ambient_dim() && contains(&self.direction, &(x - &self.point), tol)
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

fn check_same_ambient(s: &Subspace, t: &Subspace) -> Result<()> {
    if s.ambient_dim() == t.ambient_dim() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "ambient dimension mismatch: {} vs {}",
            s.ambient_dim(),
            t.ambient_dim()
        )))
    }
}

/// Flips each column so that its first largest-magnitude entry is positive.
fn normalize_signs(mut basis: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in basis.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
    basis
}

/// Full SVD with singular values sorted descending. `u` is `r × r` and `v`
/// is `c × c`; columns beyond `min(r, c)` complete the orthonormal bases.
struct SortedSvd {
    sigma: Vec<f64>,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn sorted_svd(m: &DMatrix<f64>) -> Result<SortedSvd> {
    let svd = to_faer(m)
        .svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD did not converge: {e:?}")))?;
    let sigma = svd.S().column_vector().iter().copied().collect();
    Ok(SortedSvd {
        sigma,
        u: from_faer(svd.U()),
        v: from_faer(svd.V()),
    })
}

fn numerical_rank(sigma: &[f64], tol: &Tolerance) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    let cut = tol.rank_rel * smax;
    sigma.iter().take_while(|&&s| s >= cut).count()
}

/// Rank of `m` under the relative cutoff.
pub fn rank(m: &DMatrix<f64>, tol: &Tolerance) -> Result<usize> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0);
    }
    let svd = sorted_svd(m)?;
    Ok(numerical_rank(&svd.sigma, tol))
}

/// Singular values of `m`, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::NumericalFailure(format!("SVD did not converge: {e:?}")))
}

/// Orthonormal basis of the range of `m`.
pub fn column_space(m: &DMatrix<f64>, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    if m.ncols() == 0 {
        return Ok(Subspace::zero(n));
    }
    let svd = sorted_svd(m)?;
    let r = numerical_rank(&svd.sigma, tol).min(n);
    let basis = svd.u.columns(0, r).into_owned();
    Ok(Subspace {
        basis: normalize_signs(basis),
    })
}

/// Orthonormal basis of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    let c = m.ncols();
    if c == 0 {
        return Err(Error::InvalidInput("matrix has no columns".into()));
    }
    if m.nrows() == 0 {
        return Ok(Subspace::full(c));
    }
    let svd = sorted_svd(m)?;
    let r = numerical_rank(&svd.sigma, tol);
    let basis = svd.v.columns(r, c - r).into_owned();
    Ok(Subspace {
        basis: normalize_signs(basis),
    })
}

/// Orthogonal complement `S⊥`.
pub fn complement(s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    let n = s.ambient_dim();
    if s.is_zero() {
        return Ok(Subspace::full(n));
    }
    if s.is_full() {
        return Ok(Subspace::zero(n));
    }
    let comp = null_space(&s.basis.transpose(), tol)?;
    if comp.dim() + s.dim() != n {
        return Err(Error::Internal(format!(
            "complement of a {}-dimensional subspace of R^{n} has dimension {}",
            s.dim(),
            comp.dim()
        )));
    }
    Ok(comp)
}

/// `S + T`.
pub fn sum(s: &Subspace, t: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_same_ambient(s, t)?;
    let n = s.ambient_dim();
    if s.is_zero() && t.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let mut cat = DMatrix::zeros(n, s.dim() + t.dim());
    cat.columns_mut(0, s.dim()).copy_from(&s.basis);
    cat.columns_mut(s.dim(), t.dim()).copy_from(&t.basis);
    column_space(&cat, tol)
}

/// `S ∩ T`, computed as `(S⊥ + T⊥)⊥`.
pub fn intersect(s: &Subspace, t: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_same_ambient(s, t)?;
    let joined = sum(&complement(s, tol)?, &complement(t, tol)?, tol)?;
    complement(&joined, tol)
}

/// `A⁻¹S = {x : A x ∈ S}`, well defined for singular `A`.
pub fn preimage(a: &DMatrix<f64>, s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_finite(a)?;
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "preimage needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != s.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "matrix is {0}x{0} but subspace lives in R^{1}",
            a.nrows(),
            s.ambient_dim()
        )));
    }
    let perp = complement(s, tol)?;
    if perp.is_zero() {
        return Ok(Subspace::full(a.nrows()));
    }
    null_space(&(perp.basis.transpose() * a), tol)
}

/// Membership test `‖x − P_S x‖ ≤ residual_rel (1 + ‖x‖)`.
pub fn contains(s: &Subspace, x: &DVector<f64>, tol: &Tolerance) -> bool {
    if x.len() != s.ambient_dim() {
        return false;
    }
    let resid = (x - s.project(x)).norm();
    resid <= tol.residual_rel * (1.0 + x.norm())
}

/// Set equality of two subspaces.
pub fn equal(s: &Subspace, t: &Subspace, tol: &Tolerance) -> bool {
    s.ambient_dim() == t.ambient_dim()
        && s.dim() == t.dim()
        && s.basis
            .column_iter()
            .all(|c| contains(t, &c.into_owned(), tol))
        && t.basis
            .column_iter()
            .all(|c| contains(s, &c.into_owned(), tol))
}

/// Intersection of two affine sets. `Ok(None)` means the sets are disjoint.
///
/// Solves `P.point + U a = Q.point + V b` in the minimum-norm least-squares
/// sense; the sets intersect iff the residual is at most
/// `residual_rel (1 + ‖Q.point − P.point‖)`.
pub fn affine_intersect(
    p: &AffineSet,
    q: &AffineSet,
    tol: &Tolerance,
) -> Result<Option<AffineSet>> {
    check_same_ambient(&p.direction, &q.direction)?;
    let n = p.ambient_dim();
    let gap = &q.point - &p.point;
    let (du, dv) = (p.direction.dim(), q.direction.dim());

    let (offset, resid) = if du + dv == 0 {
        (DVector::zeros(n), gap.norm())
    } else {
        let mut stacked = DMatrix::zeros(n, du + dv);
        stacked.columns_mut(0, du).copy_from(&p.direction.basis);
        stacked
            .columns_mut(du, dv)
            .copy_from(&(-&q.direction.basis));
        let coeffs = min_norm_lstsq(&stacked, &gap, tol)?;
        let resid = (&stacked * &coeffs - &gap).norm();
        (&p.direction.basis * coeffs.rows(0, du), resid)
    };
    if resid > tol.residual_rel * (1.0 + gap.norm()) {
        return Ok(None);
    }
    let direction = intersect(&p.direction, &q.direction, tol)?;
    AffineSet::new(&p.point + offset, direction).map(Some)
}

/// Minimum-norm least-squares solution of `m w ≈ rhs` via the truncated SVD.
fn min_norm_lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>, tol: &Tolerance) -> Result<DVector<f64>> {
    let svd = sorted_svd(m)?;
    let r = numerical_rank(&svd.sigma, tol);
    let c = m.ncols();
    let mut w = DVector::zeros(c);
    for k in 0..r {
        let coef = svd.u.column(k).dot(rhs) / svd.sigma[k];
        w += svd.v.column(k) * coef;
    }
    Ok(w)
}
