//! Operator learning from high-resolution (HR) or low-resolution (LR)
//! training depth.
//!
//! Both settings minimize `η L_s + L_c` over the three operators on a product
//! of oblique manifolds, where `L_s` is the mean co-sparsity penalty over the
//! training triples and `L_c = Σ_X κ_X h(Ω_X) + μ_X r(Ω_X)` holds the
//! rank (log-det) and coherence priors. In the LR setting the HR depth
//! patches are unknowns too: the problem gains a data term
//! `L_d = (1/M) Σ_m ‖D̂_m − 𝒜 D_m‖²` and is solved by alternating an operator
//! step (geometric CG) with a depth step (Euclidean CG).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{AnalysisOperator, Modality, ScalarField, SemanticField};
use crate::manifold::{self, CgConfig, CgIteration, Euclidean, Objective, Oblique};
use crate::patches::{self, center_columns, PatchLayout, PatchMatrix};
use crate::sparsity::{self, GradRequest, ModalityWeights};

/// Rows for the conventional 1.2 redundancy of the semantic operator:
/// `ceil(1.2 · L · side²)`.
pub fn redundant_rows(patch_side: usize, num_classes: usize) -> usize {
    (6 * num_classes * patch_side * patch_side).div_ceil(5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    /// Weight of the sparsity loss.
    pub eta: f64,
    /// Log-det prior weights, intensity/depth/semantics order.
    pub kappa: [f64; 3],
    /// Coherence prior weights, intensity/depth/semantics order.
    pub mu: [f64; 3],
    pub weights: ModalityWeights,
    /// Rows shared by all three operators.
    pub k: usize,
    pub patch_side: usize,
    pub num_classes: usize,
    pub lr_outer_iters: usize,
    /// Operator step.
    pub cg: CgConfig,
    /// LR depth step.
    pub depth_cg: CgConfig,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self::new(5, 3)
    }
}

impl LearnConfig {
    /// Defaults for the given patch side and class count, with `k` set by
    /// [`redundant_rows`].
    pub fn new(patch_side: usize, num_classes: usize) -> Self {
        Self {
            eta: 30.0,
            kappa: [1.0; 3],
            mu: [1.0; 3],
            weights: ModalityWeights::default(),
            k: redundant_rows(patch_side, num_classes),
            patch_side,
            num_classes,
            lr_outer_iters: 10,
            cg: CgConfig::default(),
            depth_cg: CgConfig {
                max_iters: 100,
                grad_tol: 1e-7,
                ..CgConfig::default()
            },
            seed: 0,
        }
    }

    /// Patch dimensions `[n_I, n_D, n_S]`.
    pub fn dims(&self) -> [usize; 3] {
        let n = self.patch_side * self.patch_side;
        [n, n, n * self.num_classes]
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.cg.validate()?;
        self.depth_cg.validate()?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::BadConfig("eta must be nonnegative"));
        }
        if self.kappa.iter().chain(&self.mu).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::BadConfig("prior weights must be nonnegative"));
        }
        if self.patch_side < 2 || self.num_classes == 0 {
            return Err(Error::BadDims("patch side must be >= 2 and classes >= 1"));
        }
        if self.dims().iter().any(|&n| self.k < n) {
            return Err(Error::BadDims("k must be at least the largest patch dimension"));
        }
        Ok(())
    }

    fn init_seed(&self, modality: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(modality as u64 + 1)
    }
}

/// Aligned HR patch triples.
#[derive(Debug, Clone)]
pub struct HrTrainingSet {
    pub intensity: PatchMatrix,
    pub depth: PatchMatrix,
    pub semantics: PatchMatrix,
}

impl HrTrainingSet {
    pub fn new(intensity: PatchMatrix, depth: PatchMatrix, semantics: PatchMatrix) -> Result<Self> {
        let m = intensity.count();
        if depth.count() != m || semantics.count() != m {
            return Err(Error::DimMismatch("modalities must share the patch count"));
        }
        Ok(Self {
            intensity,
            depth,
            semantics,
        })
    }

    /// Extracts the triples at `positions` of one registered scene.
    pub fn from_scene(
        intensity: &ScalarField,
        depth: &ScalarField,
        semantics: &SemanticField,
        patch_side: usize,
        positions: &[(usize, usize)],
    ) -> Result<Self> {
        check_registered(intensity, depth, semantics)?;
        let layout = PatchLayout::new(patch_side, 1, positions.to_vec())?;
        let sem_layout = layout.with_channels(semantics.num_classes());
        Self::new(
            patches::extract(intensity.grid(), &layout)?,
            patches::extract(depth.grid(), &layout)?,
            patches::extract(semantics.grid(), &sem_layout)?,
        )
    }

    pub fn len(&self) -> usize {
        self.intensity.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenates the columns of several sets.
    pub fn concat(sets: &[HrTrainingSet]) -> Result<Self> {
        let pick =
            |f: fn(&HrTrainingSet) -> &PatchMatrix| -> Result<PatchMatrix> { concat_patches(&sets.iter().map(f).collect::<Vec<_>>()) };
        Self::new(pick(|s| &s.intensity)?, pick(|s| &s.depth)?, pick(|s| &s.semantics)?)
    }
}

/// Intensity and semantic patches with low-resolution depth observations and
/// the current HR depth estimates. Depth patches are stored raw (uncentered);
/// the sparsity term sees them centered.
#[derive(Debug, Clone)]
pub struct LrTrainingSet {
    pub intensity: PatchMatrix,
    pub semantics: PatchMatrix,
    /// Observed values `D̂_m` on the HR patch grid (`n_D x M`); entries where
    /// `mask` is false are ignored.
    pub observed: DMatrix<f64>,
    /// Column-major `n_D x M` flags of which patch pixels `𝒜` samples.
    pub mask: Vec<bool>,
    /// HR depth estimates `D_m` (`n_D x M`).
    pub depth: DMatrix<f64>,
}

impl LrTrainingSet {
    pub fn new(
        intensity: PatchMatrix,
        semantics: PatchMatrix,
        observed: DMatrix<f64>,
        mask: Vec<bool>,
        depth: DMatrix<f64>,
    ) -> Result<Self> {
        let m = intensity.count();
        if semantics.count() != m || observed.ncols() != m || depth.shape() != observed.shape() {
            return Err(Error::DimMismatch("modalities must share the patch count"));
        }
        if mask.len() != observed.len() {
            return Err(Error::LengthMismatch {
                expected: observed.len(),
                actual: mask.len(),
            });
        }
        Ok(Self {
            intensity,
            semantics,
            observed,
            mask,
            depth,
        })
    }

    /// Builds the set from one scene. `observed` carries the LR depth on the
    /// HR grid with its sampling mask; `initial_depth` is its interpolation to
    /// every pixel.
    pub fn from_scene(
        intensity: &ScalarField,
        observed: &ScalarField,
        initial_depth: &ScalarField,
        semantics: &SemanticField,
        patch_side: usize,
        positions: &[(usize, usize)],
    ) -> Result<Self> {
        check_registered(intensity, observed, semantics)?;
        check_registered(intensity, initial_depth, semantics)?;
        let layout = PatchLayout::new(patch_side, 1, positions.to_vec())?;
        layout.validate(intensity.width(), intensity.height())?;
        let sem_layout = layout.with_channels(semantics.num_classes());
        let n = layout.dim();
        let mut obs = DMatrix::zeros(n, layout.len());
        patches::gather_raw(observed.grid(), &layout, &mut obs);
        let mut depth = DMatrix::zeros(n, layout.len());
        patches::gather_raw(initial_depth.grid(), &layout, &mut depth);
        let flags: Vec<f64> = match observed.mask() {
            Some(m) => m.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            None => vec![1.0; observed.len()],
        };
        let flag_grid = crate::field::Grid::new(observed.width(), observed.height(), 1, &flags)?;
        let mut mask_m = DMatrix::zeros(n, layout.len());
        patches::gather_raw(flag_grid, &layout, &mut mask_m);
        Self::new(
            patches::extract(intensity.grid(), &layout)?,
            patches::extract(semantics.grid(), &sem_layout)?,
            obs,
            mask_m.iter().map(|&v| v > 0.5).collect(),
            depth,
        )
    }

    pub fn len(&self) -> usize {
        self.intensity.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn concat(sets: &[LrTrainingSet]) -> Result<Self> {
        let intensity = concat_patches(&sets.iter().map(|s| &s.intensity).collect::<Vec<_>>())?;
        let semantics = concat_patches(&sets.iter().map(|s| &s.semantics).collect::<Vec<_>>())?;
        let observed = concat_cols(&sets.iter().map(|s| &s.observed).collect::<Vec<_>>())?;
        let depth = concat_cols(&sets.iter().map(|s| &s.depth).collect::<Vec<_>>())?;
        let mask = sets.iter().flat_map(|s| s.mask.iter().copied()).collect();
        Self::new(intensity, semantics, observed, mask, depth)
    }
}

fn check_registered(a: &ScalarField, b: &ScalarField, s: &SemanticField) -> Result<()> {
    let dims = (a.width(), a.height());
    if (b.width(), b.height()) != dims || (s.width(), s.height()) != dims {
        return Err(Error::DimMismatch("modalities must be registered on one grid"));
    }
    Ok(())
}

fn concat_cols(parts: &[&DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    if parts.iter().any(|p| p.nrows() != rows) {
        return Err(Error::DimMismatch("patch dimensions differ"));
    }
    let data: Vec<f64> = parts.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
    let cols = data.len().checked_div(rows).unwrap_or(0);
    Ok(DMatrix::from_vec(rows, cols, data))
}

fn concat_patches(parts: &[&PatchMatrix]) -> Result<PatchMatrix> {
    let data = concat_cols(&parts.iter().map(|p| p.data()).collect::<Vec<_>>())?;
    let means = parts.iter().flat_map(|p| p.means().iter().copied()).collect();
    PatchMatrix::from_parts(data, means)
}

/// Uniformly samples `count` distinct interior patch centers (all of them if
/// fewer exist), in ascending row-major order.
pub fn sample_positions(width: usize, height: usize, patch_side: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let all = patches::enumerate_dense_positions(width, height, patch_side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, all.len(), count.min(all.len())).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| all[i]).collect())
}

/// Log-det prior `h(Ω) = −(1/(n log n)) logdet((1/k) ΩᵀΩ)` and its gradient.
pub fn prior_h(op: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let (k, n) = op.shape();
    if n < 2 || k == 0 {
        return Err(Error::BadDims("log-det prior needs n >= 2"));
    }
    let gram = op.transpose() * op / k as f64;
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    let mut logdet = 0.0;
    for &p in chol.l_dirty().diagonal().iter() {
        if !(p > 1e-300) {
            return Err(Error::RankDeficient);
        }
        logdet += 2.0 * libm::log(p);
    }
    let scale = 1.0 / (n as f64 * libm::log(n as f64));
    let grad = op * chol.inverse() * (-2.0 * scale / k as f64);
    Ok((-scale * logdet, grad))
}

/// Coherence threshold beyond which the coherence barrier is treated as
/// divergent.
const COHERENCE_LIMIT: f64 = 1.0 - 1e-12;

/// Coherence prior `r(Ω) = −Σ_{i<j} log(1 − ⟨ω_i, ω_j⟩²)` and its gradient.
pub fn prior_r(op: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let k = op.nrows();
    let gram = op * op.transpose();
    let mut weights = DMatrix::zeros(k, k);
    let mut cost = 0.0;
    for j in 0..k {
        for i in 0..j {
            let c = gram[(i, j)];
            if !(c.abs() < COHERENCE_LIMIT) {
                return Err(Error::CoherentRows(i, j));
            }
            let one_minus = 1.0 - c * c;
            cost -= libm::log(one_minus);
            let w = 2.0 * c / one_minus;
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    Ok((cost, weights * op))
}

/// Breakdown of a learning objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    /// `L_s` (unweighted mean co-sparsity penalty).
    pub sparsity: f64,
    /// `L_c`.
    pub priors: f64,
    /// `L_d` (zero for HR learning).
    pub data: f64,
    pub eta: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.eta * self.sparsity + self.priors + self.data
    }
}

fn priors(ops: &[DMatrix<f64>], cfg: &LearnConfig, want_grad: bool) -> Result<(f64, Vec<DMatrix<f64>>)> {
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(3);
    for (t, op) in ops.iter().enumerate() {
        let mut g = DMatrix::zeros(op.nrows(), op.ncols());
        if cfg.kappa[t] != 0.0 {
            let (h, gh) = prior_h(op)?;
            total += cfg.kappa[t] * h;
            if want_grad {
                g += gh * cfg.kappa[t];
            }
        }
        if cfg.mu[t] != 0.0 {
            let (r, gr) = prior_r(op)?;
            total += cfg.mu[t] * r;
            if want_grad {
                g += gr * cfg.mu[t];
            }
        }
        grads.push(g);
    }
    Ok((total, grads))
}

fn check_ops(ops: &[DMatrix<f64>], cfg: &LearnConfig) -> Result<()> {
    if ops.len() != 3 {
        return Err(Error::DimMismatch("expected three operators"));
    }
    let dims = cfg.dims();
    for (op, n) in ops.iter().zip(dims) {
        if op.nrows() != cfg.k || op.ncols() != n {
            return Err(Error::DimMismatch("operator shape does not match the config"));
        }
    }
    Ok(())
}

/// `η L_s + L_c` for HR learning and its Euclidean gradient with respect to
/// the three operators.
pub fn hr_objective(ops: &[DMatrix<f64>], set: &HrTrainingSet, cfg: &LearnConfig) -> Result<(f64, Vec<DMatrix<f64>>)> {
    let (terms, grads) = operator_terms(ops, [set.intensity.data(), set.depth.data(), set.semantics.data()], cfg, true)?;
    Ok((terms.total(), grads))
}

fn operator_terms(
    ops: &[DMatrix<f64>],
    patches: [&DMatrix<f64>; 3],
    cfg: &LearnConfig,
    want_grad: bool,
) -> Result<(ObjectiveTerms, Vec<DMatrix<f64>>)> {
    check_ops(ops, cfg)?;
    let want = GradRequest {
        operators: want_grad,
        patches: [false; 3],
    };
    let batch = sparsity::batch_eval([&ops[0], &ops[1], &ops[2]], patches, &cfg.weights, want)?;
    let (prior_cost, mut grads) = priors(ops, cfg, want_grad)?;
    if let Some(op_grads) = batch.operator_grads {
        for (g, s) in grads.iter_mut().zip(op_grads) {
            *g += s * cfg.eta;
        }
    }
    let terms = ObjectiveTerms {
        sparsity: batch.cost,
        priors: prior_cost,
        data: 0.0,
        eta: cfg.eta,
    };
    Ok((terms, grads))
}

fn barrier_as_infinity(r: Result<(f64, Vec<DMatrix<f64>>)>, shape_of: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)> {
    match r {
        Err(Error::RankDeficient) | Err(Error::CoherentRows(..)) => Ok((
            f64::INFINITY,
            shape_of.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect(),
        )),
        other => other,
    }
}

/// Operator objective with fixed (centered) depth patches; prior barriers
/// evaluate to `+∞` so the line search can back off from them.
struct OperatorObjective<'a> {
    patches: [&'a DMatrix<f64>; 3],
    cfg: &'a LearnConfig,
}

impl Objective for OperatorObjective<'_> {
    fn cost(&self, x: &[DMatrix<f64>]) -> Result<f64> {
        barrier_as_infinity(operator_terms(x, self.patches, self.cfg, false).map(|(t, g)| (t.total(), g)), x).map(|r| r.0)
    }

    fn cost_grad(&self, x: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)> {
        barrier_as_infinity(operator_terms(x, self.patches, self.cfg, true).map(|(t, g)| (t.total(), g)), x)
    }
}

fn initial_operators(cfg: &LearnConfig) -> Result<Vec<DMatrix<f64>>> {
    cfg.dims()
        .iter()
        .enumerate()
        .map(|(t, &n)| manifold::random_point(cfg.k, n, cfg.init_seed(t)))
        .collect()
}

fn wrap_operators(ops: Vec<DMatrix<f64>>) -> Result<[AnalysisOperator; 3]> {
    let mut it = ops
        .into_iter()
        .zip(Modality::ALL)
        .map(|(m, modality)| AnalysisOperator::new(modality, m));
    Ok([
        it.next().expect("three operators")?,
        it.next().expect("three operators")?,
        it.next().expect("three operators")?,
    ])
}

/// Learned operators in intensity, depth, semantics order.
#[derive(Debug, Clone)]
pub struct HrLearned {
    pub operators: [AnalysisOperator; 3],
    pub initial_cost: f64,
    pub final_cost: f64,
    pub trace: Vec<CgIteration>,
}

/// Learns the three operators from HR training triples.
pub fn learn_hr(set: &HrTrainingSet, cfg: &LearnConfig) -> Result<HrLearned> {
    cfg.validate()?;
    if set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let objective = OperatorObjective {
        patches: [set.intensity.data(), set.depth.data(), set.semantics.data()],
        cfg,
    };
    let out = manifold::minimize(&Oblique, &objective, initial_operators(cfg)?, &cfg.cg)?;
    Ok(HrLearned {
        initial_cost: out.trace[0].cost,
        final_cost: out.cost,
        trace: out.trace,
        operators: wrap_operators(out.point)?,
    })
}

/// Objective of the LR depth step over the `n_D x M` depth block.
struct DepthObjective<'a> {
    depth_op: &'a DMatrix<f64>,
    depth_op_t: DMatrix<f64>,
    /// `ν_I (Ω_I I)² + ν_S (Ω_S S)²`, constant during the depth step.
    offset: DMatrix<f64>,
    observed: &'a DMatrix<f64>,
    mask: &'a [bool],
    nu_d: f64,
    eta: f64,
}

impl<'a> DepthObjective<'a> {
    fn new(ops: &'a [DMatrix<f64>], set: &'a LrTrainingSet, cfg: &LearnConfig) -> Result<Self> {
        check_ops(ops, cfg)?;
        if set.depth.nrows() != cfg.dims()[1] {
            return Err(Error::DimMismatch("depth patch dimension does not match the config"));
        }
        let ri = &ops[0] * set.intensity.data();
        let rs = &ops[2] * set.semantics.data();
        let (nu_i, nu_s) = (cfg.weights.intensity, cfg.weights.semantics);
        let offset = ri.zip_map(&rs, |a, b| nu_i * a * a + nu_s * b * b);
        Ok(Self {
            depth_op: &ops[1],
            depth_op_t: ops[1].transpose(),
            offset,
            observed: &set.observed,
            mask: &set.mask,
            nu_d: cfg.weights.depth,
            eta: cfg.eta,
        })
    }

    fn terms(&self, depth: &DMatrix<f64>, want_grad: bool) -> (f64, f64, Option<DMatrix<f64>>) {
        let m = depth.ncols();
        let scale = 1.0 / m as f64;
        let mut centered = depth.clone();
        center_columns(&mut centered);
        let rd = self.depth_op * &centered;
        let mut dr = want_grad.then(|| vec![DMatrix::zeros(rd.nrows(), rd.ncols())]);
        let sparsity = sparsity::log_penalty(Some(&self.offset), &[(self.nu_d, &rd)], dr.as_deref_mut(), scale) * scale;
        let mut data = 0.0;
        for ((d, o), &b) in depth.iter().zip(self.observed.iter()).zip(self.mask) {
            if b {
                data += (d - o) * (d - o);
            }
        }
        data *= scale;
        let grad = dr.map(|dr| {
            let mut g = &self.depth_op_t * &dr[0] * self.eta;
            center_columns(&mut g);
            for (((gv, d), o), &b) in g.iter_mut().zip(depth.iter()).zip(self.observed.iter()).zip(self.mask) {
                if b {
                    *gv += 2.0 * scale * (d - o);
                }
            }
            g
        });
        (sparsity, data, grad)
    }
}

impl Objective for DepthObjective<'_> {
    fn cost(&self, x: &[DMatrix<f64>]) -> Result<f64> {
        let (s, d, _) = self.terms(&x[0], false);
        Ok(self.eta * s + d)
    }

    fn cost_grad(&self, x: &[DMatrix<f64>]) -> Result<(f64, Vec<DMatrix<f64>>)> {
        let (s, d, g) = self.terms(&x[0], true);
        Ok((self.eta * s + d, vec![g.expect("gradient requested")]))
    }
}

/// Value and gradient of the per-batch depth objective
/// `η (1/M) Σ g_m + (1/M) Σ ‖D̂_m − 𝒜 D_m‖²` at `depth`, with the operators
/// fixed.
pub fn depth_objective(ops: &[DMatrix<f64>], set: &LrTrainingSet, depth: &DMatrix<f64>, cfg: &LearnConfig) -> Result<(f64, DMatrix<f64>)> {
    let obj = DepthObjective::new(ops, set, cfg)?;
    if depth.shape() != set.depth.shape() {
        return Err(Error::DimMismatch("depth block shape"));
    }
    let (c, mut g) = obj.cost_grad(core::slice::from_ref(depth))?;
    Ok((c, g.pop().expect("one block")))
}

/// Result of one LR depth step.
#[derive(Debug, Clone)]
pub struct DepthStep {
    pub depth: DMatrix<f64>,
    pub trace: Vec<CgIteration>,
}

/// Optimizes the HR depth estimates with the operators held fixed.
pub fn lr_objective_depth_step(ops: &[DMatrix<f64>], set: &LrTrainingSet, cfg: &LearnConfig) -> Result<DepthStep> {
    let obj = DepthObjective::new(ops, set, cfg)?;
    let out = manifold::minimize(&Euclidean, &obj, vec![set.depth.clone()], &cfg.depth_cg)?;
    Ok(DepthStep {
        depth: out.point.into_iter().next().expect("one block"),
        trace: out.trace,
    })
}

/// Full LR objective `η L_s + L_c + L_d` at the given operators and depths.
pub fn lr_objective_terms(ops: &[DMatrix<f64>], set: &LrTrainingSet, cfg: &LearnConfig) -> Result<ObjectiveTerms> {
    let mut centered = set.depth.clone();
    center_columns(&mut centered);
    let (mut terms, _) = operator_terms(ops, [set.intensity.data(), &centered, set.semantics.data()], cfg, false)?;
    let obj = DepthObjective::new(ops, set, cfg)?;
    terms.data = obj.terms(&set.depth, false).1;
    Ok(terms)
}

/// Output of LR learning.
#[derive(Debug, Clone)]
pub struct LrLearned {
    pub operators: [AnalysisOperator; 3],
    /// Final HR depth estimates (`n_D x M`, uncentered).
    pub depth: DMatrix<f64>,
    /// Total objective at the start and after every outer round.
    pub outer_trace: Vec<ObjectiveTerms>,
    /// CG traces of every operator step.
    pub operator_traces: Vec<Vec<CgIteration>>,
    /// CG traces of every depth step.
    pub depth_traces: Vec<Vec<CgIteration>>,
}

/// Alternates operator and depth steps for `cfg.lr_outer_iters` rounds,
/// starting from random operators and the set's initial depth estimates.
pub fn learn_lr(set: &LrTrainingSet, cfg: &LearnConfig) -> Result<LrLearned> {
    cfg.validate()?;
    if set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut ops = initial_operators(cfg)?;
    let mut work = set.clone();
    let mut outer_trace = vec![lr_objective_terms(&ops, &work, cfg)?];
    let mut operator_traces = Vec::new();
    let mut depth_traces = Vec::new();
    for _ in 0..cfg.lr_outer_iters {
        let mut centered = work.depth.clone();
        center_columns(&mut centered);
        let objective = OperatorObjective {
            patches: [work.intensity.data(), &centered, work.semantics.data()],
            cfg,
        };
        let out = manifold::minimize(&Oblique, &objective, ops, &cfg.cg)?;
        ops = out.point;
        operator_traces.push(out.trace);

        let step = lr_objective_depth_step(&ops, &work, cfg)?;
        work.depth = step.depth;
        depth_traces.push(step.trace);
        outer_trace.push(lr_objective_terms(&ops, &work, cfg)?);
    }
    Ok(LrLearned {
        operators: wrap_operators(ops)?,
        depth: work.depth,
        outer_trace,
        operator_traces,
        depth_traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redundancy_convention() {
        assert_eq!(redundant_rows(5, 9), 270);
        assert_eq!(redundant_rows(5, 3), 90);
        assert_eq!(redundant_rows(5, 1), 30);
    }

    #[test]
    fn orthogonal_square_h_is_one() {
        let q = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let (h, _) = prior_h(&q).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
        // rotated orthogonal matrix
        let (c, s) = (0.6, 0.8);
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((prior_h(&rot).unwrap().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_h() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        assert_eq!(prior_h(&m).unwrap_err(), Error::RankDeficient);
        assert!(matches!(prior_h(&DMatrix::from_element(2, 1, 1.0)), Err(Error::BadDims(_))));
    }

    #[test]
    fn coherence_prior_values() {
        let eye = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        assert_eq!(prior_r(&eye).unwrap().0, 0.0);
        let sixty = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.75f64.sqrt()]);
        assert!((prior_r(&sixty).unwrap().0 - 0.287_682_072_451_780_9).abs() < 1e-12);
        let dup = DMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.6, 0.8]);
        assert_eq!(prior_r(&dup).unwrap_err(), Error::CoherentRows(0, 1));
    }

    #[test]
    fn sample_positions_are_interior_and_distinct() {
        let p = sample_positions(10, 8, 5, 12, 3).unwrap();
        assert_eq!(p.len(), 12);
        let mut q = p.clone();
        q.dedup();
        assert_eq!(q.len(), 12);
        assert!(p.iter().all(|&(r, c)| (2..6).contains(&r) && (2..8).contains(&c)));
        assert_eq!(sample_positions(10, 8, 5, 1000, 3).unwrap().len(), 24);
        assert_eq!(p, sample_positions(10, 8, 5, 12, 3).unwrap());
    }
}
