//! Seeded generators for random test systems.
//!
//! All generators draw from a caller-supplied RNG so that batch runs are
//! reproducible. Entries are standard normal; `A` is scaled by `1/√n`.

use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linear::{self, LinearSystem};
use crate::subspace::{self, Tolerance};

/// Rejection-sampling attempts before a generator gives up.
const MAX_DRAWS: usize = 10_000;

/// Reproducible RNG for a run: one stream per `(seed, index)`.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn gaussian_matrix<R: RngExt>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: RngExt>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn uniform_vector<R: RngExt>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: RngExt>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Ratio `σ_min / σ_max` of the column-normalized reachability matrix
/// `[B  AB  …  Aⁿ⁻¹B]`; zero when it is rank deficient.
pub fn reachability_conditioning(sys: &LinearSystem) -> f64 {
    let n = sys.state_dim();
    let m = sys.input_dim();
    let mut blocks = DMatrix::zeros(n, n * m);
    let mut power = sys.b().clone();
    for k in 0..n {
        blocks.columns_mut(k * m, m).copy_from(&power);
        power = sys.a() * power;
    }
    for mut c in blocks.column_iter_mut() {
        let norm = c.norm();
        if norm > 0.0 {
            c /= norm;
        }
    }
    match subspace::singular_values(&blocks) {
        Ok(s) if s[0] > 0.0 => s[n - 1] / s[0],
        _ => 0.0,
    }
}

fn sigma_ratio(a: &DMatrix<f64>) -> f64 {
    match subspace::singular_values(a) {
        Ok(s) if s[0] > 0.0 => s[s.len() - 1] / s[0],
        _ => 0.0,
    }
}

/// Minimum conditioning accepted by the controllable-pair generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    /// Lower bound on `σ_min(A) / σ_max(A)`; zero disables the check.
    pub min_a_ratio: f64,
    /// Lower bound on [`reachability_conditioning`]; zero disables the check.
    pub min_reach_ratio: f64,
}

impl Default for Conditioning {
    fn default() -> Self {
        Self {
            min_a_ratio: 1e-3,
            min_reach_ratio: 1e-6,
        }
    }
}

/// A random controllable pair with invertible `A`, satisfying `cond`.
pub fn controllable_pair<R: RngExt>(
    rng: &mut R,
    n: usize,
    m: usize,
    cond: &Conditioning,
) -> Option<LinearSystem> {
    let scale = 1.0 / (n as f64).sqrt();
    for _ in 0..MAX_DRAWS {
        let a = gaussian_matrix(rng, n, n) * scale;
        let b = gaussian_matrix(rng, n, m);
        if sigma_ratio(&a) < cond.min_a_ratio {
            continue;
        }
        let sys = LinearSystem::factored(a, b).ok()?;
        if reachability_conditioning(&sys) >= cond.min_reach_ratio {
            return Some(sys);
        }
    }
    None
}

/// A random controllable pair whose `A` has rank `n − 1`.
pub fn singular_pair<R: RngExt>(
    rng: &mut R,
    n: usize,
    min_reach_ratio: f64,
) -> Option<LinearSystem> {
    let scale = 1.0 / (n as f64).sqrt();
    for _ in 0..MAX_DRAWS {
        let g = gaussian_matrix(rng, n, n) * scale;
        let v = gaussian_vector(rng, n).normalize();
        let a = &g - (&g * &v) * v.transpose();
        let b = gaussian_matrix(rng, n, 1);
        let sys = LinearSystem::factored(a, b).ok()?;
        if reachability_conditioning(&sys) >= min_reach_ratio {
            return Some(sys);
        }
    }
    None
}

/// A pair with an unreachable mode at a nonzero eigenvalue, hidden behind an
/// orthogonal change of coordinates: `A = T [[A₁₁, A₁₂], [0, A₂₂]] Tᵀ`,
/// `B = T [B₁; 0]`. `A₂₂` is diagonal with entries of modulus in `[0.5, 2]`.
pub fn uncontrollable_pair<R: RngExt>(rng: &mut R, n: usize, m: usize) -> LinearSystem {
    assert!(n >= 2, "need room for a hidden mode");
    let hidden = rng.random_range(1..n);
    let visible = n - hidden;
    let mut block = gaussian_matrix(rng, n, n) / (n as f64).sqrt();
    block.view_mut((visible, 0), (hidden, visible)).fill(0.0);
    block
        .view_mut((visible, visible), (hidden, hidden))
        .fill(0.0);
    for i in 0..hidden {
        let mag: f64 = rng.random_range(0.5..2.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        block[(visible + i, visible + i)] = sign * mag;
    }
    let mut b = DMatrix::zeros(n, m);
    b.view_mut((0, 0), (visible, m))
        .copy_from(&gaussian_matrix(rng, visible, m));
    let t = random_orthogonal(rng, n);
    let a = &t * block * t.transpose();
    let b = &t * b;
    LinearSystem::factored(a, b).expect("generated shapes are consistent")
}

/// True if `sys` passes the subspace-chain controllability test.
pub fn is_controllable(sys: &LinearSystem, tol: &Tolerance) -> bool {
    linear::geometric_controllable(sys, tol).unwrap_or(false)
}
