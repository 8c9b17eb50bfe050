//! Joint depth super-resolution and semantic denoising.
//!
//! The unknowns are the HR depth map `D` and the semantic field `S`. Each
//! round minimizes `η_t E_s + E_d` by Euclidean CG, warm-started from the
//! previous round, while `η_t` shrinks geometrically and `λ_t = ρ η_t`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{AnalysisOperator, Grid, ScalarField, SemanticField};
use crate::manifold::{self, CgConfig, CgIteration, Euclidean, Objective, Termination};
use crate::patches::{self, center_columns, PatchLayout};
use crate::simulate::{interpolate_observations, DownsampleOp};
use crate::sparsity::{self, ModalityWeights};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub eta_start: f64,
    pub eta_end: f64,
    pub restarts: usize,
    /// `λ_t = rho · η_t`.
    pub rho: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            eta_start: 30.0,
            eta_end: 0.04,
            restarts: 10,
            rho: 1.0,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_end > 0.0 && self.eta_start >= self.eta_end && self.eta_start.is_finite()) {
            return Err(Error::BadConfig("need eta_start >= eta_end > 0"));
        }
        if self.restarts == 0 {
            return Err(Error::BadConfig("restarts must be >= 1"));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::BadConfig("rho must be nonnegative"));
        }
        Ok(())
    }

    /// `η` of round `t` (0-based).
    pub fn eta(&self, t: usize) -> f64 {
        if self.restarts == 1 {
            return self.eta_start;
        }
        let frac = t as f64 / (self.restarts - 1) as f64;
        self.eta_start * libm::pow(self.eta_end / self.eta_start, frac)
    }

    pub fn lambda(&self, t: usize) -> f64 {
        self.rho * self.eta(t)
    }
}

/// Gradients with respect to depth and semantics.
type FieldGrads = (Vec<f64>, Vec<f64>);

/// Default per-round CG budget.
pub fn default_sr_cg() -> CgConfig {
    CgConfig {
        max_iters: 50,
        ..CgConfig::default()
    }
}

#[derive(Debug, Clone)]
pub struct SrProblem {
    pub intensity: ScalarField,
    /// LR depth on the HR grid; its mask marks the observed pixels.
    pub observed_depth: ScalarField,
    pub noisy_semantics: SemanticField,
    /// Intensity, depth and semantic operators.
    pub operators: [AnalysisOperator; 3],
    pub weights: ModalityWeights,
    pub downsample: DownsampleOp,
    pub schedule: AnnealSchedule,
    pub cg: CgConfig,
}

impl SrProblem {
    pub fn width(&self) -> usize {
        self.intensity.width()
    }

    pub fn height(&self) -> usize {
        self.intensity.height()
    }

    pub fn num_classes(&self) -> usize {
        self.noisy_semantics.num_classes()
    }

    /// Side of the square patches implied by the intensity operator.
    pub fn patch_side(&self) -> Result<usize> {
        let n = self.operators[0].cols();
        let side = libm::round(libm::sqrt(n as f64)) as usize;
        if side * side != n {
            return Err(Error::DimMismatch("intensity operator width is not a square patch"));
        }
        Ok(side)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.schedule.validate()?;
        self.cg.validate()?;
        let (w, h) = (self.width(), self.height());
        if (self.observed_depth.width(), self.observed_depth.height()) != (w, h)
            || (self.noisy_semantics.width(), self.noisy_semantics.height()) != (w, h)
        {
            return Err(Error::DimMismatch("modalities must be registered on one grid"));
        }
        let side = self.patch_side()?;
        let n = side * side;
        let [oi, od, os] = &self.operators;
        if od.cols() != n || os.cols() != n * self.num_classes() {
            return Err(Error::DimMismatch("operator widths disagree with patch side and classes"));
        }
        if oi.rows() != od.rows() || od.rows() != os.rows() {
            return Err(Error::DimMismatch("operators must share the row count"));
        }
        let observed: Vec<bool> = (0..w * h).map(|i| self.observed_depth.is_observed(i)).collect();
        if self.downsample.mask(w, h)? != observed {
            return Err(Error::DimMismatch("downsample operator disagrees with the observation mask"));
        }
        if !observed.iter().any(|&b| b) {
            return Err(Error::NoObservations);
        }
        Ok(())
    }
}

/// Precomputed quantities shared by every evaluation on one problem.
struct Workspace<'a> {
    problem: &'a SrProblem,
    depth_layout: PatchLayout,
    sem_layout: PatchLayout,
    /// `ν_I (Ω_I P_r I)²` for every interior patch.
    intensity_offset: DMatrix<f64>,
    omega_d_t: DMatrix<f64>,
    omega_s_t: DMatrix<f64>,
    mask: Vec<bool>,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a SrProblem) -> Result<Self> {
        problem.validate()?;
        let side = problem.patch_side()?;
        let depth_layout = PatchLayout::dense(problem.width(), problem.height(), side, 1)?;
        let sem_layout = depth_layout.with_channels(problem.num_classes());
        let pi = patches::extract(problem.intensity.grid(), &depth_layout)?;
        let nu_i = problem.weights.intensity;
        let intensity_offset = (problem.operators[0].matrix() * pi.data()).map(|r| nu_i * r * r);
        Ok(Self {
            problem,
            omega_d_t: problem.operators[1].matrix().transpose(),
            omega_s_t: problem.operators[2].matrix().transpose(),
            mask: (0..problem.observed_depth.len())
                .map(|i| problem.observed_depth.is_observed(i))
                .collect(),
            depth_layout,
            sem_layout,
            intensity_offset,
        })
    }

    fn patch_count(&self) -> usize {
        self.depth_layout.len()
    }

    fn centered_patches(&self, data: &[f64], layout: &PatchLayout) -> DMatrix<f64> {
        let p = self.problem;
        let grid = Grid {
            width: p.width(),
            height: p.height(),
            channels: layout.channels(),
            data,
        };
        let mut m = DMatrix::zeros(layout.dim(), layout.len());
        patches::gather_raw(grid, layout, &mut m);
        center_columns(&mut m);
        m
    }

    /// `E_s` and, on request, its gradients with respect to `D` and `S`.
    fn smoothness(&self, depth: &[f64], sem: &[f64], want_grad: bool) -> (f64, Option<FieldGrads>) {
        let p = self.problem;
        let scale = 1.0 / self.patch_count() as f64;
        let rd = p.operators[1].matrix() * self.centered_patches(depth, &self.depth_layout);
        let rs = p.operators[2].matrix() * self.centered_patches(sem, &self.sem_layout);
        let terms = [(p.weights.depth, &rd), (p.weights.semantics, &rs)];
        if !want_grad {
            return (
                sparsity::log_penalty(Some(&self.intensity_offset), &terms, None, scale) * scale,
                None,
            );
        }
        let mut dr = [DMatrix::zeros(rd.nrows(), rd.ncols()), DMatrix::zeros(rs.nrows(), rs.ncols())];
        let cost = sparsity::log_penalty(Some(&self.intensity_offset), &terms, Some(&mut dr), scale) * scale;
        let (w, h) = (p.width(), p.height());
        let mut gd = vec![0.0; depth.len()];
        patches::scatter_centered(&(&self.omega_d_t * &dr[0]), &self.depth_layout, w, h, &mut gd);
        let mut gs = vec![0.0; sem.len()];
        patches::scatter_centered(&(&self.omega_s_t * &dr[1]), &self.sem_layout, w, h, &mut gs);
        (cost, Some((gd, gs)))
    }

    /// `E_d` and, on request, its gradients.
    fn data(&self, depth: &[f64], sem: &[f64], lambda: f64, want_grad: bool) -> (f64, Option<FieldGrads>) {
        let p = self.problem;
        let obs = p.observed_depth.values();
        let noisy = p.noisy_semantics.probs();
        let mut cost = 0.0;
        for ((d, o), &b) in depth.iter().zip(obs).zip(&self.mask) {
            if b {
                cost += (d - o) * (d - o);
            }
        }
        let sem_cost: f64 = sem.iter().zip(noisy).map(|(s, n)| (s - n) * (s - n)).sum();
        cost += lambda * sem_cost;
        let grads = want_grad.then(|| {
            let gd = depth
                .iter()
                .zip(obs)
                .zip(&self.mask)
                .map(|((d, o), &b)| if b { 2.0 * (d - o) } else { 0.0 })
                .collect();
            let gs = sem.iter().zip(noisy).map(|(s, n)| 2.0 * lambda * (s - n)).collect();
            (gd, gs)
        });
        (cost, grads)
    }
}

/// One annealing round's objective `η E_s + E_d` over blocks `[D, S]`, each
/// stored as a column vector in row-major pixel order.
struct RoundObjective<'w, 'a> {
    ws: &'w Workspace<'a>,
    eta: f64,
    lambda: f64,
}

impl RoundObjective<'_, '_> {
    fn eval(&self, x: &[DMatrix<f64>], want_grad: bool) -> (f64, Option<Vec<DMatrix<f64>>>) {
        let (d, s) = (x[0].as_slice(), x[1].as_slice());
        let (es, gs) = self.ws.smoothness(d, s, want_grad);
        let (ed, gd) = self.ws.data(d, s, self.lambda, want_grad);
        let cost = self.eta * es + ed;
        let grads = gs.zip(gd).map(|((sd, ss), (dd, ds))| {
            let combine = |a: Vec<f64>, b: Vec<f64>| -> DMatrix<f64> {
                let v: Vec<f64> = a.iter().zip(&b).map(|(u, v)| self.eta * u + v).collect();
                DMatrix::from_vec(v.len(), 1, v)
            };
            vec![combine(sd, dd), combine(ss, ds)]
        });
        (cost, grads)
    }
}

impl Objective for RoundObjective<'_, '_> {
    fn cost(&self, x: &[DMatrix<f64>]) -> Result<f64> {
        Ok(self.eval(x, false).0)
    }

    fn cost_grad(&self, x: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)> {
        let (c, g) = self.eval(x, true);
        Ok((c, g.expect("gradient requested")))
    }
}

fn check_unknowns(depth: &ScalarField, sem: &SemanticField, problem: &SrProblem) -> Result<()> {
    let dims = (problem.width(), problem.height());
    if (depth.width(), depth.height()) != dims || (sem.width(), sem.height()) != dims || sem.num_classes() != problem.num_classes() {
        return Err(Error::DimMismatch("unknowns do not match the problem grid"));
    }
    Ok(())
}

/// Data term `‖𝒜D − D̂‖² + λ‖S − Ŝ‖²` with its gradients in field layout.
pub fn data_term(depth: &ScalarField, sem: &SemanticField, problem: &SrProblem, lambda: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_unknowns(depth, sem, problem)?;
    let ws = Workspace::new(problem)?;
    let (c, g) = ws.data(depth.values(), sem.probs(), lambda, true);
    let (gd, gs) = g.expect("gradient requested");
    Ok((c, gd, gs))
}

/// Smoothness term: the co-sparsity penalty averaged over all interior
/// patches, with its gradients in field layout.
pub fn smoothness_term(depth: &ScalarField, sem: &SemanticField, problem: &SrProblem) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_unknowns(depth, sem, problem)?;
    let ws = Workspace::new(problem)?;
    let (c, g) = ws.smoothness(depth.values(), sem.probs(), true);
    let (gd, gs) = g.expect("gradient requested");
    Ok((c, gd, gs))
}

/// Summary of one annealing round.
#[derive(Debug, Clone, PartialEq)]
pub struct SrRound {
    pub round: usize,
    pub eta: f64,
    pub lambda: f64,
    pub iterations: usize,
    /// Round objective at the warm start.
    pub initial_objective: f64,
    pub objective: f64,
    pub termination: Termination,
    /// RMSE of the round's depth against ground truth, when one was given.
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SrOutput {
    pub depth: ScalarField,
    pub semantics: SemanticField,
    pub rounds: Vec<SrRound>,
    /// Per-round CG iterations.
    pub traces: Vec<Vec<CgIteration>>,
}

/// Runs the annealed reconstruction.
pub fn superresolve(problem: &SrProblem) -> Result<SrOutput> {
    superresolve_with_gt(problem, None)
}

/// Like [`superresolve`], also recording each round's depth RMSE against
/// `gt` over all pixels.
pub fn superresolve_with_gt(problem: &SrProblem, gt: Option<&ScalarField>) -> Result<SrOutput> {
    let ws = Workspace::new(problem)?;
    let (w, h) = (problem.width(), problem.height());
    if let Some(g) = gt {
        if (g.width(), g.height()) != (w, h) {
            return Err(Error::DimMismatch("ground truth grid"));
        }
    }
    let init = interpolate_observations(&problem.observed_depth)?.into_values();
    let sem0 = problem.noisy_semantics.probs().to_vec();
    let mut x = vec![DMatrix::from_vec(init.len(), 1, init), DMatrix::from_vec(sem0.len(), 1, sem0)];
    let mut rounds = Vec::with_capacity(problem.schedule.restarts);
    let mut traces = Vec::with_capacity(problem.schedule.restarts);
    for t in 0..problem.schedule.restarts {
        let objective = RoundObjective {
            ws: &ws,
            eta: problem.schedule.eta(t),
            lambda: problem.schedule.lambda(t),
        };
        let initial_objective = objective.cost(&x)?;
        let out = manifold::minimize(&Euclidean, &objective, x, &problem.cg)?;
        x = out.point;
        rounds.push(SrRound {
            round: t,
            eta: objective.eta,
            lambda: objective.lambda,
            iterations: out.iterations,
            initial_objective,
            objective: out.cost,
            termination: out.termination,
            rmse: gt.map(|g| rmse_all(x[0].as_slice(), g.values())),
        });
        traces.push(out.trace);
    }
    let mut it = x.into_iter();
    let depth = ScalarField::new(w, h, it.next().expect("depth block").data.into())?;
    let semantics = finalize_semantics(it.next().expect("semantic block").as_slice(), w, h, problem.num_classes())?;
    Ok(SrOutput {
        depth,
        semantics,
        rounds,
        traces,
    })
}

fn rmse_all(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(sum / a.len() as f64)
}

/// Clamps to `[0, 1]` and renormalizes each pixel; all-zero pixels become
/// uniform.
fn finalize_semantics(raw: &[f64], w: usize, h: usize, l: usize) -> Result<SemanticField> {
    let mut probs: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    for px in probs.chunks_exact_mut(l) {
        let sum: f64 = px.iter().sum();
        if sum > 0.0 {
            px.iter_mut().for_each(|v| *v /= sum);
        } else {
            px.iter_mut().for_each(|v| *v = 1.0 / l as f64);
        }
    }
    SemanticField::normalized(w, h, l, probs)
}

/// Per-pixel argmax class; ties go to the lowest index.
pub fn hard_labels(sem: &SemanticField) -> Vec<usize> {
    sem.probs()
        .chunks_exact(sem.num_classes())
        .map(|px| {
            let mut best = 0;
            for (c, &v) in px.iter().enumerate() {
                if v > px[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}
