//! Oblique-manifold geometry for analysis operators.
//!
//! An operator `Ω ∈ ℝ^{k×n}` is a point when every row has unit norm (its
//! transpose lies on `OB(n, k)`). The tangent space at `Ω` holds matrices
//! whose rows are orthogonal to the matching rows of `Ω`. Retraction is row
//! renormalization and vector transport is re-projection.

mod cg;

pub use cg::{geometric_cg, minimize, BetaRule, CgConfig, CgIteration, CgOutcome, FnObjective, Objective, Termination};

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Row-norm tolerance a point must satisfy.
pub(crate) const ROW_CHECK_TOL: f64 = crate::field::ROW_NORM_TOL;

/// Rows with norm below this are treated as numerically zero.
pub const ZERO_ROW_NORM: f64 = 1e-14;

/// Relative pivot floor used when checking that a draw has full column rank.
const RANK_PIVOT_TOL: f64 = 1e-10;

fn row_norm(m: &DMatrix<f64>, i: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        s += m[(i, j)] * m[(i, j)];
    }
    libm::sqrt(s)
}

/// Whether every row of `m` has unit norm within `tol`.
pub fn is_on_manifold(m: &DMatrix<f64>, tol: f64) -> bool {
    m.nrows() > 0 && (0..m.nrows()).all(|i| (row_norm(m, i) - 1.0).abs() <= tol)
}

/// Draws a `k x n` operator with standard-normal rows normalized to unit
/// length, redrawing until it has full column rank `n`.
pub fn random_point(k: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 || k < n {
        return Err(Error::BadDims("random point requires k >= n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = DMatrix::zeros(k, n);
        for i in 0..k {
            for j in 0..n {
                m[(i, j)] = StandardNormal.sample(&mut rng);
            }
        }
        if (0..k).any(|i| row_norm(&m, i) < ZERO_ROW_NORM) {
            continue;
        }
        normalize_rows(&mut m);
        if has_full_column_rank(&m) {
            return Ok(m);
        }
    }
}

fn has_full_column_rank(m: &DMatrix<f64>) -> bool {
    let gram = m.transpose() * m;
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    match gram.cholesky() {
        Some(c) => c.l().diagonal().iter().all(|&p| p * p > RANK_PIVOT_TOL * scale),
        None => false,
    }
}

fn normalize_rows(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let norm = row_norm(m, i);
        for j in 0..m.ncols() {
            m[(i, j)] /= norm;
        }
    }
}

/// Removes the radial component of every row of `grad` with respect to the
/// matching row of `point`.
pub fn project_tangent(point: &DMatrix<f64>, grad: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if point.shape() != grad.shape() {
        return Err(Error::DimMismatch("tangent and point shapes differ"));
    }
    let mut out = grad.clone();
    project_in_place(point, &mut out);
    Ok(out)
}

fn project_in_place(point: &DMatrix<f64>, v: &mut DMatrix<f64>) {
    let (k, n) = point.shape();
    for i in 0..k {
        let mut dot = 0.0;
        for j in 0..n {
            dot += v[(i, j)] * point[(i, j)];
        }
        for j in 0..n {
            v[(i, j)] -= dot * point[(i, j)];
        }
    }
}

/// Moves along `tangent` by `step` and renormalizes every row.
pub fn retract(point: &DMatrix<f64>, tangent: &DMatrix<f64>, step: f64) -> Result<DMatrix<f64>> {
    if point.shape() != tangent.shape() {
        return Err(Error::DimMismatch("tangent and point shapes differ"));
    }
    if step == 0.0 {
        return Ok(point.clone());
    }
    let mut out = point + tangent * step;
    for i in 0..out.nrows() {
        if row_norm(&out, i) < ZERO_ROW_NORM {
            return Err(Error::ZeroRow);
        }
    }
    normalize_rows(&mut out);
    Ok(out)
}

/// Projection transport of a tangent vector to the tangent space at `new_point`.
pub fn transport(tangent: &DMatrix<f64>, new_point: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    project_tangent(new_point, tangent)
}

/// Manifold operations needed by [`minimize`]. Points and tangent vectors
/// are lists of matrix blocks.
pub trait Geometry {
    /// Maps a Euclidean gradient (or any ambient vector) to the tangent space.
    fn project(&self, point: &[DMatrix<f64>], v: &mut [DMatrix<f64>]);
    fn retract(&self, point: &[DMatrix<f64>], dir: &[DMatrix<f64>], step: f64) -> Result<Vec<DMatrix<f64>>>;
    /// Moves a tangent vector to the tangent space at `new_point`.
    fn transport(&self, new_point: &[DMatrix<f64>], v: &mut [DMatrix<f64>]);
}

/// Flat space: projection and transport are identities.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Geometry for Euclidean {
    fn project(&self, _point: &[DMatrix<f64>], _v: &mut [DMatrix<f64>]) {}

    fn retract(&self, point: &[DMatrix<f64>], dir: &[DMatrix<f64>], step: f64) -> Result<Vec<DMatrix<f64>>> {
        Ok(point.iter().zip(dir).map(|(x, d)| x + d * step).collect())
    }

    fn transport(&self, _new_point: &[DMatrix<f64>], _v: &mut [DMatrix<f64>]) {}
}

/// Product of oblique manifolds, one per block.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oblique;

impl Geometry for Oblique {
    fn project(&self, point: &[DMatrix<f64>], v: &mut [DMatrix<f64>]) {
        for (p, t) in point.iter().zip(v.iter_mut()) {
            project_in_place(p, t);
        }
    }

    fn retract(&self, point: &[DMatrix<f64>], dir: &[DMatrix<f64>], step: f64) -> Result<Vec<DMatrix<f64>>> {
        point.iter().zip(dir).map(|(p, d)| retract(p, d, step)).collect()
    }

    fn transport(&self, new_point: &[DMatrix<f64>], v: &mut [DMatrix<f64>]) {
        self.project(new_point, v);
    }
}

pub(crate) fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}
