//! Nonlinear conjugate gradient with Polak-Ribière-plus directions and a
//! backtracking Armijo line search, generic over the [`Geometry`] it runs on.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{inner, Geometry, Oblique, ROW_CHECK_TOL};
use crate::error::{Error, Result};

/// Smallest trial step before the line search gives up.
const MIN_STEP: f64 = 1e-16;
/// Upper bound on the extrapolated initial trial step.
const MAX_STEP: f64 = 1e12;

/// A smooth objective over a list of matrix blocks.
///
/// `cost` may return `+∞` for points outside the objective's domain (barrier
/// terms); the line search rejects such trials. NaN or `-∞` is an error.
pub trait Objective {
    fn cost(&self, x: &[DMatrix<f64>]) -> Result<f64>;
    /// Cost together with the Euclidean gradient, one block per point block.
    fn cost_grad(&self, x: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)>;
}

/// Adapts a closure returning `(cost, gradient)` into an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)>,
{
    fn cost(&self, x: &[DMatrix<f64>]) -> Result<f64> {
        (self.0)(x).map(|(c, _)| c)
    }

    fn cost_grad(&self, x: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)> {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    PolakRibierePlus,
    /// `β = 0`: plain (Riemannian) gradient descent.
    SteepestDescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
    /// Factor applied to the first trial step after iteration one, on top of
    /// the ratio of successive directional derivatives. Values above 1 let
    /// the step recover after heavy backtracking.
    pub step_growth: f64,
    pub beta: BetaRule,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            grad_tol: 1e-6,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
            step_growth: 1.3,
            beta: BetaRule::PolakRibierePlus,
        }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::BadConfig("grad_tol must be positive"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::BadConfig("armijo_c must lie in (0, 1)"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::BadConfig("backtrack_factor must lie in (0, 1)"));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::BadConfig("initial_step must be positive"));
        }
        if !(self.step_growth >= 1.0 && self.step_growth.is_finite()) {
            return Err(Error::BadConfig("step_growth must be at least 1"));
        }
        Ok(())
    }
}

/// One accepted step. `iter == 0` records the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgIteration {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub step: f64,
    /// Cost before the step.
    pub previous_cost: f64,
    /// Directional derivative `⟨grad, d⟩` along the search direction.
    pub slope: f64,
}

impl CgIteration {
    /// Whether this step satisfies sufficient decrease with constant `c`.
    pub fn satisfies_armijo(&self, c: f64) -> bool {
        self.iter == 0 || self.cost <= self.previous_cost + c * self.step * self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// No trial step above the floor achieved sufficient decrease.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub point: Vec<DMatrix<f64>>,
    pub cost: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<CgIteration>,
}

fn finite_grad(g: &[DMatrix<f64>]) -> bool {
    g.iter().all(|b| b.iter().all(|v| v.is_finite()))
}

/// Minimizes `objective` from `init` on `geometry`.
///
/// Every accepted step satisfies the Armijo condition, so the recorded cost
/// sequence is non-increasing. A line-search stall ends the run with
/// [`Termination::Stalled`] and keeps the last accepted point.
pub fn minimize<G: Geometry, O: Objective + ?Sized>(
    geometry: &G,
    objective: &O,
    init: Vec<DMatrix<f64>>,
    cfg: &CgConfig,
) -> Result<CgOutcome> {
    cfg.validate()?;
    let mut x = init;
    let (mut cost, mut grad) = objective.cost_grad(&x)?;
    if !cost.is_finite() || !finite_grad(&grad) {
        return Err(Error::ObjectiveNonFinite);
    }
    if grad.len() != x.len() || grad.iter().zip(&x).any(|(g, p)| g.shape() != p.shape()) {
        return Err(Error::DimMismatch("gradient blocks do not match the point"));
    }
    geometry.project(&x, &mut grad);
    let mut grad_sq = inner(&grad, &grad);
    let mut trace = Vec::with_capacity(cfg.max_iters.min(4096) + 1);
    trace.push(CgIteration {
        iter: 0,
        cost,
        grad_norm: libm::sqrt(grad_sq),
        step: 0.0,
        previous_cost: cost,
        slope: 0.0,
    });

    let mut dir: Vec<DMatrix<f64>> = grad.iter().map(|g| -g).collect();
    let mut prev_step = cfg.initial_step;
    let mut prev_slope = 0.0;
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        if libm::sqrt(grad_sq) <= cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut slope = inner(&grad, &dir);
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad_sq;
        }
        let mut step = if it == 1 {
            cfg.initial_step
        } else {
            let s = cfg.step_growth * prev_step * prev_slope / slope;
            if s.is_finite() && s > 0.0 {
                s.clamp(MIN_STEP, MAX_STEP)
            } else {
                cfg.initial_step
            }
        };

        // Trial points are evaluated with their gradient: the first trial is
        // usually accepted, so this saves a second pass at the new point.
        let accepted = loop {
            let trial = geometry.retract(&x, &dir, step)?;
            let (trial_cost, trial_grad) = objective.cost_grad(&trial)?;
            if trial_cost.is_nan() || trial_cost == f64::NEG_INFINITY {
                return Err(Error::ObjectiveNonFinite);
            }
            if trial_cost <= cost + cfg.armijo_c * step * slope {
                break Some((trial, trial_cost, trial_grad));
            }
            step *= cfg.backtrack_factor;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some((new_x, new_cost, mut new_grad)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        if !finite_grad(&new_grad) {
            return Err(Error::ObjectiveNonFinite);
        }
        geometry.project(&new_x, &mut new_grad);
        let new_grad_sq = inner(&new_grad, &new_grad);

        // transport the previous gradient and direction into the new tangent space
        let mut old_grad = grad;
        geometry.transport(&new_x, &mut old_grad);
        geometry.transport(&new_x, &mut dir);
        let beta = match cfg.beta {
            BetaRule::SteepestDescent => 0.0,
            BetaRule::PolakRibierePlus => {
                let num = new_grad_sq - inner(&new_grad, &old_grad);
                (num / grad_sq).max(0.0)
            }
        };
        for (d, g) in dir.iter_mut().zip(&new_grad) {
            *d *= beta;
            *d -= g;
        }

        trace.push(CgIteration {
            iter: it,
            cost: new_cost,
            grad_norm: libm::sqrt(new_grad_sq),
            step,
            previous_cost: cost,
            slope,
        });
        prev_step = step;
        prev_slope = slope;
        x = new_x;
        cost = new_cost;
        grad = new_grad;
        grad_sq = new_grad_sq;
        iterations = it;
    }
    if termination == Termination::MaxIters && libm::sqrt(grad_sq) <= cfg.grad_tol {
        termination = Termination::Converged;
    }

    Ok(CgOutcome {
        point: x,
        cost,
        grad_norm: libm::sqrt(grad_sq),
        iterations,
        termination,
        trace,
    })
}

/// Geometric conjugate gradient on a product of oblique manifolds.
///
/// Every block of `init` must have unit-norm rows. Unlike [`minimize`], a
/// line-search stall is reported as [`Error::LineSearchStall`].
pub fn geometric_cg<O: Objective + ?Sized>(objective: &O, init: Vec<DMatrix<f64>>, cfg: &CgConfig) -> Result<CgOutcome> {
    if init.is_empty() || !init.iter().all(|b| super::is_on_manifold(b, ROW_CHECK_TOL)) {
        return Err(Error::BadDims("initial point is not on the oblique manifold"));
    }
    let out = minimize(&Oblique, objective, init, cfg)?;
    if out.termination == Termination::Stalled {
        return Err(Error::LineSearchStall {
            iterations: out.iterations,
        });
    }
    Ok(out)
}
