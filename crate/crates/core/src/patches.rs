//! Patch position operators: extraction of vectorized, mean-subtracted
//! patches and the exact adjoint used to pull patch gradients back onto the
//! grid.
//!
//! A patch of side `s` centered at `(row, col)` covers rows
//! `row - (s-1)/2 ..= row + s/2` (and likewise for columns). Only positions
//! whose full footprint lies inside the grid are admitted. Within a patch the
//! vectorization order is row-major over pixels with the channel index
//! fastest.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::Grid;

/// Patch geometry shared by every column of a [`PatchMatrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchLayout {
    patch_side: usize,
    channels: usize,
    positions: Vec<(usize, usize)>,
}

impl PatchLayout {
    pub fn new(patch_side: usize, channels: usize, positions: Vec<(usize, usize)>) -> Result<Self> {
        if patch_side == 0 || channels == 0 {
            return Err(Error::BadDims("patch side and channels must be positive"));
        }
        Ok(Self {
            patch_side,
            channels,
            positions,
        })
    }

    /// Every interior position of a `width x height` grid, row-major.
    pub fn dense(width: usize, height: usize, patch_side: usize, channels: usize) -> Result<Self> {
        let positions = enumerate_dense_positions(width, height, patch_side)?;
        Self::new(patch_side, channels, positions)
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    /// Patch dimension `patch_side² × channels`.
    pub fn dim(&self) -> usize {
        self.patch_side * self.patch_side * self.channels
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Same positions with a different channel count.
    pub fn with_channels(&self, channels: usize) -> Self {
        Self {
            patch_side: self.patch_side,
            channels,
            positions: self.positions.clone(),
        }
    }

    /// Checks that every position admits a full patch in the grid.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        for &(row, col) in &self.positions {
            if top_left(row, col, self.patch_side, width, height).is_none() {
                return Err(Error::PositionOutOfBounds { row, col });
            }
        }
        Ok(())
    }
}

fn top_left(row: usize, col: usize, side: usize, width: usize, height: usize) -> Option<(usize, usize)> {
    let lo = (side - 1) / 2;
    let hi = side - 1 - lo;
    if row < lo || col < lo || row + hi >= height || col + hi >= width {
        return None;
    }
    Some((row - lo, col - lo))
}

/// `n x M` column stack of vectorized, mean-subtracted patches.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    data: DMatrix<f64>,
    means: Vec<f64>,
}

impl PatchMatrix {
    /// Wraps already-centered columns. Columns are not re-checked.
    pub fn from_parts(data: DMatrix<f64>, means: Vec<f64>) -> Result<Self> {
        if means.len() != data.ncols() {
            return Err(Error::LengthMismatch {
                expected: data.ncols(),
                actual: means.len(),
            });
        }
        Ok(Self { data, means })
    }

    /// Centers every column of `raw` and records the removed means.
    pub fn centered(mut raw: DMatrix<f64>) -> Self {
        let means = center_columns(&mut raw);
        Self { data: raw, means }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn count(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// Multiplies every entry (and mean) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: &self.data * factor,
            means: self.means.iter().map(|m| m * factor).collect(),
        }
    }
}

/// Subtracts each column's mean in place and returns the means.
pub fn center_columns(m: &mut DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() as f64;
    let mut means = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / n;
        col.add_scalar_mut(-mean);
        means.push(mean);
    }
    means
}

/// Vectorized patches at `layout`'s positions, each minus its own mean.
pub fn extract(grid: Grid<'_>, layout: &PatchLayout) -> Result<PatchMatrix> {
    if grid.channels != layout.channels {
        return Err(Error::ChannelMismatch {
            expected: layout.channels,
            actual: grid.channels,
        });
    }
    layout.validate(grid.width, grid.height)?;
    let mut data = DMatrix::zeros(layout.dim(), layout.len());
    gather_raw(grid, layout, &mut data);
    Ok(PatchMatrix::centered(data))
}

/// Copies raw (uncentered) patches into the columns of `out`.
///
/// `layout` must already be validated against the grid and `out` must be
/// `layout.dim() x layout.len()`.
pub(crate) fn gather_raw(grid: Grid<'_>, layout: &PatchLayout, out: &mut DMatrix<f64>) {
    let side = layout.patch_side;
    let ch = grid.channels;
    let row_len = side * ch;
    for (m, &(row, col)) in layout.positions.iter().enumerate() {
        let (r0, c0) = top_left(row, col, side, grid.width, grid.height).expect("validated layout");
        let n = out.nrows();
        let dst = &mut out.as_mut_slice()[m * n..(m + 1) * n];
        for pr in 0..side {
            let src = ((r0 + pr) * grid.width + c0) * ch;
            dst[pr * row_len..(pr + 1) * row_len].copy_from_slice(&grid.data[src..src + row_len]);
        }
    }
}

/// Adjoint of [`extract`]: returns `Σ_r P_rᵀ (g_r − mean(g_r))` on a grid of
/// `width x height x layout.channels()` values.
pub fn adjoint_scatter(patch_grads: &DMatrix<f64>, layout: &PatchLayout, width: usize, height: usize) -> Result<Vec<f64>> {
    if patch_grads.nrows() != layout.dim() || patch_grads.ncols() != layout.len() {
        return Err(Error::DimMismatch("patch gradients do not match the layout"));
    }
    layout.validate(width, height)?;
    let mut out = vec![0.0; width * height * layout.channels];
    scatter_centered(patch_grads, layout, width, height, &mut out);
    Ok(out)
}

/// Accumulates the centered adjoint into `out` (not cleared). Patches are
/// visited in layout order, so the result is independent of any threading
/// done by callers upstream.
pub(crate) fn scatter_centered(patch_grads: &DMatrix<f64>, layout: &PatchLayout, width: usize, height: usize, out: &mut [f64]) {
    let side = layout.patch_side;
    let ch = layout.channels;
    let row_len = side * ch;
    let n = layout.dim() as f64;
    for (m, &(row, col)) in layout.positions.iter().enumerate() {
        let (r0, c0) = top_left(row, col, side, width, height).expect("validated layout");
        let g = &patch_grads.as_slice()[m * layout.dim()..(m + 1) * layout.dim()];
        let mean = g.iter().sum::<f64>() / n;
        for pr in 0..side {
            let dst = ((r0 + pr) * width + c0) * ch;
            for (o, v) in out[dst..dst + row_len].iter_mut().zip(&g[pr * row_len..(pr + 1) * row_len]) {
                *o += v - mean;
            }
        }
    }
}

/// All centers whose full patch fits in the grid, in row-major order.
pub fn enumerate_dense_positions(width: usize, height: usize, patch_side: usize) -> Result<Vec<(usize, usize)>> {
    if patch_side == 0 || width < patch_side || height < patch_side {
        return Err(Error::GridTooSmall { width, height, patch_side });
    }
    let lo = (patch_side - 1) / 2;
    let rows = height - patch_side + 1;
    let cols = width - patch_side + 1;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push((r + lo, c + lo));
        }
    }
    Ok(out)
}
