//! Trimodal co-sparsity penalty.
//!
//! For responses `r_I = Ω_I I`, `r_D = Ω_D D`, `r_S = Ω_S S` the penalty is
//! `g = Σ_j log(1 + ν_I r_Ij² + ν_D r_Dj² + ν_S r_Sj²)`, which vanishes only
//! when row `j` is in the co-support of all three modalities at once.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Per-modality weights `ν` inside the log penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityWeights {
    pub intensity: f64,
    pub depth: f64,
    pub semantics: f64,
}

impl ModalityWeights {
    pub fn new(intensity: f64, depth: f64, semantics: f64) -> Result<Self> {
        let w = Self {
            intensity,
            depth,
            semantics,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.as_array();
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) || all.iter().all(|&v| v == 0.0) {
            return Err(Error::BadWeights);
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.intensity, self.depth, self.semantics]
    }
}

impl Default for ModalityWeights {
    /// `ν_I = ν_D = 3`, `ν_S = 30`.
    fn default() -> Self {
        Self {
            intensity: 3.0,
            depth: 3.0,
            semantics: 30.0,
        }
    }
}

fn check_lengths(r_i: &[f64], r_d: &[f64], r_s: &[f64]) -> Result<()> {
    for r in [r_d, r_s] {
        if r.len() != r_i.len() {
            return Err(Error::LengthMismatch {
                expected: r_i.len(),
                actual: r.len(),
            });
        }
    }
    Ok(())
}

/// Penalty `g` of a single patch triple given its three response vectors.
pub fn g_cost(r_i: &[f64], r_d: &[f64], r_s: &[f64], w: &ModalityWeights) -> Result<f64> {
    check_lengths(r_i, r_d, r_s)?;
    Ok(r_i
        .iter()
        .zip(r_d)
        .zip(r_s)
        .map(|((a, b), c)| libm::log1p(w.intensity * a * a + w.depth * b * b + w.semantics * c * c))
        .sum())
}

/// Gradient of [`g_cost`] with respect to each response vector.
pub fn g_grad_responses(r_i: &[f64], r_d: &[f64], r_s: &[f64], w: &ModalityWeights) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_lengths(r_i, r_d, r_s)?;
    let k = r_i.len();
    let (mut gi, mut gd, mut gs) = (Vec::with_capacity(k), Vec::with_capacity(k), Vec::with_capacity(k));
    for j in 0..k {
        let (a, b, c) = (r_i[j], r_d[j], r_s[j]);
        let inv = 1.0 / (1.0 + w.intensity * a * a + w.depth * b * b + w.semantics * c * c);
        gi.push(2.0 * w.intensity * a * inv);
        gd.push(2.0 * w.depth * b * inv);
        gs.push(2.0 * w.semantics * c * inv);
    }
    Ok((gi, gd, gs))
}

/// Row indices whose response magnitude is at most `tol` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct CoSupport {
    pub indices: Vec<usize>,
    pub tolerance: f64,
}

impl CoSupport {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Size of the intersection with another co-support (both sorted).
    pub fn intersection_len(&self, other: &CoSupport) -> usize {
        self.indices.iter().filter(|i| other.indices.binary_search(i).is_ok()).count()
    }
}

/// Diagnostic tolerance for co-support extraction; the optimization never
/// thresholds.
pub const DEFAULT_COSUPPORT_TOL: f64 = 1e-8;

pub fn co_support(response: &[f64], tol: f64) -> CoSupport {
    CoSupport {
        indices: response
            .iter()
            .enumerate()
            .filter(|(_, r)| r.abs() <= tol)
            .map(|(j, _)| j)
            .collect(),
        tolerance: tol,
    }
}

/// One fused pass over response matrices of equal shape.
///
/// Returns `Σ_entries log(1 + offset + Σ_t ν_t R_t²)`. When `grads` is given,
/// `grads[t]` receives `∂/∂R_t = 2 ν_t R_t / (1 + ...)` scaled by `scale`.
pub(crate) fn log_penalty(
    offset: Option<&DMatrix<f64>>,
    terms: &[(f64, &DMatrix<f64>)],
    grads: Option<&mut [DMatrix<f64>]>,
    scale: f64,
) -> f64 {
    let len = terms[0].1.len();
    let off = offset.map(|o| o.as_slice());
    let mut total = 0.0;
    let mut grads = grads;
    for idx in 0..len {
        let mut q = off.map_or(0.0, |o| o[idx]);
        for (nu, r) in terms {
            let v = r.as_slice()[idx];
            q += nu * v * v;
        }
        total += libm::log1p(q);
        if let Some(gs) = grads.as_deref_mut() {
            let inv = 2.0 * scale / (1.0 + q);
            for ((nu, r), g) in terms.iter().zip(gs.iter_mut()) {
                g.as_mut_slice()[idx] = nu * r.as_slice()[idx] * inv;
            }
        }
    }
    total
}

/// Which gradients [`batch_eval`] should form.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradRequest {
    pub operators: bool,
    pub patches: [bool; 3],
}

impl GradRequest {
    pub const ALL: GradRequest = GradRequest {
        operators: true,
        patches: [true; 3],
    };
}

/// Cost `(1/M) Σ_m g_m` over a batch of aligned patch triples and its
/// requested Euclidean gradients.
#[derive(Debug, Clone)]
pub struct BatchTerms {
    pub cost: f64,
    pub operator_grads: Option<[DMatrix<f64>; 3]>,
    pub patch_grads: [Option<DMatrix<f64>>; 3],
}

/// Evaluates the mean penalty over `M` patch columns; `ops[t]` is `k x n_t`
/// and `patches[t]` is `n_t x M` in intensity, depth, semantics order.
pub fn batch_eval(ops: [&DMatrix<f64>; 3], patches: [&DMatrix<f64>; 3], w: &ModalityWeights, want: GradRequest) -> Result<BatchTerms> {
    let k = ops[0].nrows();
    let m = patches[0].ncols();
    if m == 0 {
        return Err(Error::DimMismatch("empty patch batch"));
    }
    for t in 0..3 {
        if ops[t].nrows() != k {
            return Err(Error::DimMismatch("operators must share the row count"));
        }
        if patches[t].ncols() != m {
            return Err(Error::DimMismatch("modalities must share the patch count"));
        }
        if ops[t].ncols() != patches[t].nrows() {
            return Err(Error::DimMismatch("operator columns must match patch dimension"));
        }
    }
    let responses: [DMatrix<f64>; 3] = core::array::from_fn(|t| ops[t] * patches[t]);
    let nu = w.as_array();
    let terms = [(nu[0], &responses[0]), (nu[1], &responses[1]), (nu[2], &responses[2])];
    let scale = 1.0 / m as f64;
    let need_grads = want.operators || want.patches.iter().any(|&b| b);
    if !need_grads {
        let cost = log_penalty(None, &terms, None, scale) * scale;
        return Ok(BatchTerms {
            cost,
            operator_grads: None,
            patch_grads: [None, None, None],
        });
    }
    let mut dr: [DMatrix<f64>; 3] = core::array::from_fn(|_| DMatrix::zeros(k, m));
    let cost = log_penalty(None, &terms, Some(&mut dr), scale) * scale;
    let operator_grads = want.operators.then(|| core::array::from_fn(|t| &dr[t] * patches[t].transpose()));
    let patch_grads = core::array::from_fn(|t| want.patches[t].then(|| ops[t].transpose() * &dr[t]));
    Ok(BatchTerms {
        cost,
        operator_grads,
        patch_grads,
    })
}

/// Cost and every Euclidean gradient of the mean batch penalty.
pub fn batch_cost_and_grads(ops: [&DMatrix<f64>; 3], patches: [&DMatrix<f64>; 3], w: &ModalityWeights) -> Result<BatchTerms> {
    batch_eval(ops, patches, w, GradRequest::ALL)
}
