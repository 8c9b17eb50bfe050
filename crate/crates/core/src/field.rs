//! Grid and operator containers shared by every stage of the pipeline.
//!
//! All grids are row-major. Semantic fields store the class axis as the
//! fastest-varying index within a pixel.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A 2-D grid of real values (intensity or depth) with an optional
/// observation mask (`true` = observed).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidField("empty grid"));
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite value"));
        }
        Ok(Self {
            width,
            height,
            values,
            mask: None,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(width, height, values)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                actual: mask.len(),
            });
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn without_mask(mut self) -> Self {
        self.mask = None;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn is_observed(&self, idx: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[idx])
    }

    /// Number of observed pixels (all pixels when no mask is attached).
    pub fn observed_count(&self) -> usize {
        match &self.mask {
            Some(m) => m.iter().filter(|&&b| b).count(),
            None => self.values.len(),
        }
    }

    pub fn grid(&self) -> Grid<'_> {
        Grid {
            width: self.width,
            height: self.height,
            channels: 1,
            data: &self.values,
        }
    }
}

/// A 2-D grid of per-pixel class-probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticField {
    width: usize,
    height: usize,
    num_classes: usize,
    probs: Vec<f64>,
    normalized: bool,
}

/// Per-pixel sum tolerance for fields flagged as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-6;

impl SemanticField {
    /// Raw (possibly unnormalized) confidence field. Entries must lie in [0, 1].
    pub fn new(width: usize, height: usize, num_classes: usize, probs: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || num_classes == 0 {
            return Err(Error::InvalidField("empty semantic grid"));
        }
        let expected = width * height * num_classes;
        if probs.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: probs.len(),
            });
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidField("probability outside [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            num_classes,
            probs,
            normalized: false,
        })
    }

    /// Probability field whose per-pixel sums must be 1 within [`NORMALIZATION_TOL`].
    pub fn normalized(width: usize, height: usize, num_classes: usize, probs: Vec<f64>) -> Result<Self> {
        let mut field = Self::new(width, height, num_classes, probs)?;
        if field
            .probs
            .chunks_exact(num_classes)
            .any(|px| (px.iter().sum::<f64>() - 1.0).abs() > NORMALIZATION_TOL)
        {
            return Err(Error::InvalidField("pixel probabilities do not sum to 1"));
        }
        field.normalized = true;
        Ok(field)
    }

    pub fn one_hot(width: usize, height: usize, num_classes: usize, labels: &[usize]) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: labels.len(),
            });
        }
        let mut probs = vec![0.0; labels.len() * num_classes];
        for (px, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(Error::InvalidField("label exceeds class count"));
            }
            probs[px * num_classes + label] = 1.0;
        }
        Self::normalized(width, height, num_classes, probs)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn pixel(&self, idx: usize) -> &[f64] {
        &self.probs[idx * self.num_classes..(idx + 1) * self.num_classes]
    }

    pub fn grid(&self) -> Grid<'_> {
        Grid {
            width: self.width,
            height: self.height,
            channels: self.num_classes,
            data: &self.probs,
        }
    }
}

/// Borrowed view of a row-major multi-channel grid.
#[derive(Debug, Clone, Copy)]
pub struct Grid<'a> {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: &'a [f64],
}

impl<'a> Grid<'a> {
    pub fn new(width: usize, height: usize, channels: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::LengthMismatch {
                expected: width * height * channels,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Intensity,
    Depth,
    Semantics,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Intensity, Modality::Depth, Modality::Semantics];

    pub fn index(self) -> usize {
        match self {
            Modality::Intensity => 0,
            Modality::Depth => 1,
            Modality::Semantics => 2,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Modality::Intensity => "i",
            Modality::Depth => "d",
            Modality::Semantics => "s",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Intensity => "intensity",
            Modality::Depth => "depth",
            Modality::Semantics => "semantics",
        })
    }
}

/// Row-norm tolerance for operators held in memory.
pub const ROW_NORM_TOL: f64 = 1e-10;

/// A `k x n` analysis operator with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOperator {
    modality: Modality,
    matrix: DMatrix<f64>,
}

impl AnalysisOperator {
    pub fn new(modality: Modality, matrix: DMatrix<f64>) -> Result<Self> {
        check_row_norms(&matrix, ROW_NORM_TOL)?;
        Ok(Self { modality, matrix })
    }

    /// Accepts rows whose norms are within `tol` of one and renormalizes them
    /// in f64. Used when loading operators stored at reduced precision.
    pub fn renormalized(modality: Modality, mut matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_row_norms(&matrix, tol)?;
        for mut row in matrix.row_iter_mut() {
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            row /= norm;
        }
        Self::new(modality, matrix)
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.matrix.transpose().as_slice().to_vec()
    }

    pub fn from_row_major(modality: Modality, rows: usize, cols: usize, data: &[f64], tol: f64) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::renormalized(modality, DMatrix::from_row_slice(rows, cols, data), tol)
    }
}

pub(crate) fn check_row_norms(matrix: &DMatrix<f64>, tol: f64) -> Result<()> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::BadDims("operator must be non-empty"));
    }
    for (row, r) in matrix.row_iter().enumerate() {
        let norm = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(Error::NotUnitNorm { row, norm });
        }
    }
    Ok(())
}
