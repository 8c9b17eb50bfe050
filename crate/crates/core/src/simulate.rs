//! Synthetic scenes, the measurement model and the interpolation baselines.
//!
//! Scenes are Voronoi partitions. Neighbouring cells that draw the same class
//! are merged, so every depth discontinuity is also a semantic one. Intensity
//! has a level per region plus multiplicative shadow bands that cut across
//! regions, giving intensity edges with no depth edge behind them.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SemanticField};

/// Intensity multiplier inside a shadow band.
pub const SHADOW_FACTOR: f64 = 0.5;
/// Standard deviation of the additive intensity noise.
pub const INTENSITY_NOISE: f64 = 0.002;
/// Range of the per-region intensity levels.
pub const INTENSITY_LEVELS: (f64, f64) = (0.25, 0.9);
/// Largest planar ramp slope per pixel, relative to the depth level spacing
/// over the longer image side.
pub const MAX_RAMP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub num_regions: usize,
    pub num_classes: usize,
    pub shadow_bands: usize,
    pub depth_range: (f64, f64),
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            num_regions: 8,
            num_classes: 3,
            shadow_bands: 2,
            depth_range: (1.0, 10.0),
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::BadSpec("empty grid"));
        }
        if self.num_regions == 0 || self.num_regions > self.width * self.height {
            return Err(Error::BadSpec("num_regions must be in 1..=pixels"));
        }
        if self.num_classes == 0 {
            return Err(Error::BadSpec("num_classes must be >= 1"));
        }
        let (lo, hi) = self.depth_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::BadSpec("depth_range must be finite with min < max"));
        }
        Ok(())
    }
}

/// A generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub intensity: ScalarField,
    pub depth: ScalarField,
    pub semantics: SemanticField,
    /// Merged region (connected same-class cells) of every pixel.
    pub regions: Vec<usize>,
    /// Depth spacing between region levels.
    pub level_gap: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Generates a deterministic synthetic scene from `spec`.
pub fn gen_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let seeds: Vec<(f64, f64)> = (0..spec.num_regions)
        .map(|_| (rng.random_range(0.0..h as f64), rng.random_range(0.0..w as f64)))
        .collect();
    let cells: Vec<usize> = (0..w * h)
        .map(|idx| {
            let (r, c) = ((idx / w) as f64 + 0.5, (idx % w) as f64 + 0.5);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (s, &(sr, sc)) in seeds.iter().enumerate() {
                let d = (r - sr) * (r - sr) + (c - sc) * (c - sc);
                if d < best_d {
                    best = s;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    let class_of = |cell: usize| cell % spec.num_classes;

    let mut parent: Vec<usize> = (0..spec.num_regions).collect();
    for idx in 0..w * h {
        let (r, c) = (idx / w, idx % w);
        let mut link = |other: usize| {
            let (a, b) = (cells[idx], cells[other]);
            if a != b && class_of(a) == class_of(b) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        if c + 1 < w {
            link(idx + 1);
        }
        if r + 1 < h {
            link(idx + w);
        }
    }
    // Merged regions are numbered by their smallest cell index among those present.
    let mut present = vec![false; spec.num_regions];
    for &cell in &cells {
        present[cell] = true;
    }
    let mut region_of_root = vec![usize::MAX; spec.num_regions];
    let mut roots = Vec::new();
    for (cell, _) in present.iter().enumerate().filter(|(_, &p)| p) {
        let root = find(&mut parent, cell);
        if region_of_root[root] == usize::MAX {
            region_of_root[root] = roots.len();
            roots.push(cell);
        }
    }
    let regions: Vec<usize> = cells.iter().map(|&c| region_of_root[find(&mut parent, c)]).collect();
    let count = roots.len();

    let (lo, hi) = spec.depth_range;
    let gap = (hi - lo) / count as f64;
    let mut depth_levels: Vec<f64> = (0..count).map(|i| lo + gap * (i as f64 + 0.5)).collect();
    depth_levels.shuffle(&mut rng);
    let (ilo, ihi) = INTENSITY_LEVELS;
    let mut intensity_levels: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                0.5 * (ilo + ihi)
            } else {
                ilo + (ihi - ilo) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    intensity_levels.shuffle(&mut rng);
    let max_slope = MAX_RAMP * gap / w.max(h) as f64;
    let ramps: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let theta = rng.random_range(0.0..core::f64::consts::TAU);
            let slope = if count == 1 { 0.0 } else { max_slope * rng.random_range(0.5..=1.0) };
            (slope * libm::sin(theta), slope * libm::cos(theta))
        })
        .collect();

    let bands: Vec<(f64, f64, f64, f64)> = (0..spec.shadow_bands)
        .map(|_| {
            let (pr, pc) = (rng.random_range(0.0..h as f64), rng.random_range(0.0..w as f64));
            let theta = rng.random_range(0.0..core::f64::consts::PI);
            let half_width = 0.5 * rng.random_range(4.0..=10.0);
            (pr, pc, theta, half_width)
        })
        .collect();
    let noise = Normal::new(0.0, INTENSITY_NOISE).expect("valid sigma");

    let mut depth = Vec::with_capacity(w * h);
    let mut intensity = Vec::with_capacity(w * h);
    let mut labels = Vec::with_capacity(w * h);
    for (idx, &region) in regions.iter().enumerate() {
        let (r, c) = ((idx / w) as f64 + 0.5, (idx % w) as f64 + 0.5);
        let (sr, sc) = seeds[roots[region]];
        let (gr, gc) = ramps[region];
        depth.push((depth_levels[region] + gr * (r - sr) + gc * (c - sc)).clamp(lo, hi));
        let shadowed = bands.iter().any(|&(pr, pc, theta, half)| {
            let dist = (r - pr) * libm::cos(theta) - (c - pc) * libm::sin(theta);
            dist.abs() <= half
        });
        let base = intensity_levels[region] * if shadowed { SHADOW_FACTOR } else { 1.0 };
        intensity.push((base + noise.sample(&mut rng)).clamp(0.0, 1.0));
        labels.push(class_of(roots[region]));
    }
    Ok(Scene {
        intensity: ScalarField::new(w, h, intensity)?,
        depth: ScalarField::new(w, h, depth)?,
        semantics: SemanticField::one_hot(w, h, spec.num_classes, &labels)?,
        regions,
        level_gap: gap,
    })
}

/// The measurement operator mapping a dense depth grid to observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DownsampleOp {
    /// Point samples at pixels `(factor·i, factor·j)`.
    GridSubsample { factor: usize },
    /// Explicit row-major observation mask.
    Mask(Vec<bool>),
}

impl DownsampleOp {
    /// Row-major sampling mask for a `width x height` grid.
    pub fn mask(&self, width: usize, height: usize) -> Result<Vec<bool>> {
        match self {
            DownsampleOp::GridSubsample { factor } => {
                let d = *factor;
                if d == 0 {
                    return Err(Error::BadSpec("downsample factor must be >= 1"));
                }
                if d > width.min(height) {
                    return Err(Error::FactorTooLarge { factor: d, width, height });
                }
                Ok((0..width * height)
                    .map(|i| (i / width).is_multiple_of(d) && (i % width).is_multiple_of(d))
                    .collect())
            }
            DownsampleOp::Mask(m) => {
                if m.len() != width * height {
                    return Err(Error::LengthMismatch {
                        expected: width * height,
                        actual: m.len(),
                    });
                }
                Ok(m.clone())
            }
        }
    }
}

/// Additive Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

/// Samples `depth` through `op` and adds noise. Unobserved entries hold 0.
pub fn apply_downsample(depth: &ScalarField, op: &DownsampleOp, noise: Noise) -> Result<ScalarField> {
    let mask = op.mask(depth.width(), depth.height())?;
    if !mask.iter().any(|&b| b) {
        return Err(Error::NoObservations);
    }
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::BadSpec("noise sigma must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, noise.sigma).map_err(|_| Error::BadSpec("noise sigma"))?;
    let values = depth
        .values()
        .iter()
        .zip(&mask)
        .map(|(&v, &b)| match (b, noise.sigma > 0.0) {
            (false, _) => 0.0,
            (true, false) => v,
            (true, true) => v + normal.sample(&mut rng),
        })
        .collect();
    ScalarField::new(depth.width(), depth.height(), values)?.with_mask(mask)
}

/// Replaces each pixel's class with a uniformly drawn wrong one with
/// probability `flip_rate`, then blends the one-hot vector with the uniform
/// distribution by `softness`.
pub fn corrupt_semantics(gt: &SemanticField, flip_rate: f64, softness: f64, seed: u64) -> Result<SemanticField> {
    if !(0.0..=1.0).contains(&flip_rate) || !(0.0..=1.0).contains(&softness) {
        return Err(Error::BadRate);
    }
    let l = gt.num_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = crate::superres::hard_labels(gt);
    let mut probs = Vec::with_capacity(gt.probs().len());
    for &truth in &labels {
        let flip = rng.random_bool(flip_rate);
        let class = if flip && l > 1 {
            let wrong = rng.random_range(0..l - 1);
            if wrong >= truth {
                wrong + 1
            } else {
                wrong
            }
        } else {
            truth
        };
        for c in 0..l {
            let one_hot = if c == class { 1.0 } else { 0.0 };
            probs.push(((1.0 - softness) * one_hot + softness / l as f64).clamp(0.0, 1.0));
        }
    }
    SemanticField::normalized(gt.width(), gt.height(), l, probs)
}

fn observation_mask(observed: &ScalarField) -> Vec<bool> {
    match observed.mask() {
        Some(m) => m.to_vec(),
        None => vec![true; observed.len()],
    }
}

/// Recovers the subsampling factor of grid observations.
pub fn grid_factor(observed: &ScalarField) -> Result<usize> {
    let (w, h) = (observed.width(), observed.height());
    let mask = observation_mask(observed);
    if !mask[0] {
        return Err(Error::NotGridObservations);
    }
    let along_row = (1..w).find(|&c| mask[c]);
    let along_col = (1..h).find(|&r| mask[r * w]);
    let factor = match (along_row, along_col) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => w.max(h),
    }
    .min(w.min(h));
    if (DownsampleOp::GridSubsample { factor }).mask(w, h)? != mask {
        return Err(Error::NotGridObservations);
    }
    Ok(factor)
}

/// Coarse sample grid (`rows x cols`, row-major) of grid observations.
fn coarse(observed: &ScalarField, d: usize) -> (usize, usize, Vec<f64>) {
    let rows = observed.height().div_ceil(d);
    let cols = observed.width().div_ceil(d);
    let data = (0..rows * cols).map(|i| observed.get((i / cols) * d, (i % cols) * d)).collect();
    (rows, cols, data)
}

/// Nearest-neighbour upsampling of grid observations (halves round up).
pub fn baseline_nearest(observed: &ScalarField) -> Result<ScalarField> {
    let d = grid_factor(observed)?;
    let (rows, cols, data) = coarse(observed, d);
    let nearest = |x: usize, n: usize| ((2 * x + d) / (2 * d)).min(n - 1);
    ScalarField::from_fn(observed.width(), observed.height(), |r, c| {
        data[nearest(r, rows) * cols + nearest(c, cols)]
    })
}

/// Catmull-Rom weights for fractional offset `t` at taps -1, 0, 1, 2.
fn catmull_rom(t: f64) -> [f64; 4] {
    let (t2, t3) = (t * t, t * t * t);
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Extends a 1-D sample sequence linearly: index `i` may lie outside `0..n`.
fn extended(samples: &[f64], i: isize) -> f64 {
    let n = samples.len() as isize;
    if n == 1 {
        return samples[0];
    }
    if i < 0 {
        samples[0] + i as f64 * (samples[1] - samples[0])
    } else if i >= n {
        let last = samples[(n - 1) as usize];
        last + (i - n + 1) as f64 * (last - samples[(n - 2) as usize])
    } else {
        samples[i as usize]
    }
}

/// Bicubic (Catmull-Rom, `a = -0.5`) upsampling of grid observations. Samples
/// beyond the coarse grid are extrapolated linearly, so affine and bilinear
/// fields are reproduced exactly.
pub fn baseline_bicubic(observed: &ScalarField) -> Result<ScalarField> {
    let d = grid_factor(observed)?;
    let (rows, cols, data) = coarse(observed, d);
    // Pad one sample before and two after in both directions.
    let (prow, pcol) = (rows + 3, cols + 3);
    let mut padded = vec![0.0; prow * pcol];
    let mut row_ext = vec![0.0; rows * pcol];
    for i in 0..rows {
        let line = &data[i * cols..(i + 1) * cols];
        for j in 0..pcol {
            row_ext[i * pcol + j] = extended(line, j as isize - 1);
        }
    }
    let mut column = vec![0.0; rows];
    for j in 0..pcol {
        for (i, v) in column.iter_mut().enumerate() {
            *v = row_ext[i * pcol + j];
        }
        for i in 0..prow {
            padded[i * pcol + j] = extended(&column, i as isize - 1);
        }
    }
    let taps = |x: usize| -> (usize, [f64; 4]) { (x / d, catmull_rom((x % d) as f64 / d as f64)) };
    ScalarField::from_fn(observed.width(), observed.height(), |r, c| {
        let (i0, wr) = taps(r);
        let (j0, wc) = taps(c);
        // Offsets from the centre tap keep constant fields exact.
        let centre = padded[(i0 + 1) * pcol + j0 + 1];
        let mut acc = 0.0;
        for (a, wa) in wr.iter().enumerate() {
            let base = (i0 + a) * pcol + j0;
            for (b, wb) in wc.iter().enumerate() {
                acc += wa * wb * (padded[base + b] - centre);
            }
        }
        centre + acc
    })
}

/// Interpolates masked observations to every pixel with a normalized tent
/// kernel. Grid observations with factor `d` use radius `d`, which is
/// bilinear between samples and constant past the last sample; other masks
/// use the smallest radius that reaches every pixel.
pub fn interpolate_observations(observed: &ScalarField) -> Result<ScalarField> {
    let (w, h) = (observed.width(), observed.height());
    let mask = observation_mask(observed);
    if !mask.iter().any(|&b| b) {
        return Err(Error::NoObservations);
    }
    let radius = match grid_factor(observed) {
        Ok(d) => d,
        Err(_) => chebyshev_reach(&mask, w, h) + 1,
    };
    let rad = radius as isize;
    let values = observed.values();
    ScalarField::from_fn(w, h, |r, c| {
        let (mut num, mut den) = (0.0, 0.0);
        for dr in 1 - rad..rad {
            let rr = r as isize + dr;
            if rr < 0 || rr >= h as isize {
                continue;
            }
            let wr = 1.0 - dr.unsigned_abs() as f64 / radius as f64;
            for dc in 1 - rad..rad {
                let cc = c as isize + dc;
                if cc < 0 || cc >= w as isize {
                    continue;
                }
                let idx = rr as usize * w + cc as usize;
                if mask[idx] {
                    let wt = wr * (1.0 - dc.unsigned_abs() as f64 / radius as f64);
                    num += wt * values[idx];
                    den += wt;
                }
            }
        }
        num / den
    })
}

/// Largest Chebyshev distance from any pixel to its nearest observed pixel.
fn chebyshev_reach(mask: &[bool], w: usize, h: usize) -> usize {
    // Two-pass chamfer transform with unit weights in all eight directions.
    let big = w + h;
    let mut dist: Vec<usize> = mask.iter().map(|&b| if b { 0 } else { big }).collect();
    for r in 0..h {
        for c in 0..w {
            let mut best = dist[r * w + c];
            for (dr, dc) in [(-1isize, -1isize), (-1, 0), (-1, 1), (0, -1)] {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                if rr >= 0 && cc >= 0 && (cc as usize) < w {
                    best = best.min(dist[rr as usize * w + cc as usize] + 1);
                }
            }
            dist[r * w + c] = best;
        }
    }
    for r in (0..h).rev() {
        for c in (0..w).rev() {
            let mut best = dist[r * w + c];
            for (dr, dc) in [(1isize, 1isize), (1, 0), (1, -1), (0, 1)] {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                if (rr as usize) < h && cc >= 0 && (cc as usize) < w {
                    best = best.min(dist[rr as usize * w + cc as usize] + 1);
                }
            }
            dist[r * w + c] = best;
        }
    }
    dist.into_iter().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> SceneSpec {
        SceneSpec {
            seed,
            ..SceneSpec::default()
        }
    }

    #[test]
    fn single_region_is_flat() {
        let s = gen_scene(&SceneSpec {
            num_regions: 1,
            shadow_bands: 0,
            ..spec(4)
        })
        .unwrap();
        let d0 = s.depth.values()[0];
        assert!(s.depth.values().iter().all(|&v| v == d0));
        assert!(s.semantics.probs().chunks(3).all(|p| p == s.semantics.pixel(0)));
    }

    #[test]
    fn scene_is_deterministic_and_in_range() {
        let a = gen_scene(&spec(7)).unwrap();
        assert_eq!(a, gen_scene(&spec(7)).unwrap());
        assert_ne!(a.depth, gen_scene(&spec(8)).unwrap().depth);
        assert!(a.depth.values().iter().all(|v| (1.0..=10.0).contains(v)));
        assert!(a.intensity.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn bad_specs() {
        assert!(gen_scene(&SceneSpec { num_regions: 0, ..spec(0) }).is_err());
        assert!(gen_scene(&SceneSpec {
            depth_range: (2.0, 1.0),
            ..spec(0)
        })
        .is_err());
        assert!(gen_scene(&SceneSpec { num_classes: 0, ..spec(0) }).is_err());
    }

    #[test]
    fn grid_sample_counts() {
        let s = gen_scene(&spec(1)).unwrap();
        let obs = apply_downsample(&s.depth, &DownsampleOp::GridSubsample { factor: 4 }, Noise::default()).unwrap();
        assert_eq!(obs.observed_count(), 256);
        let id = apply_downsample(&s.depth, &DownsampleOp::GridSubsample { factor: 1 }, Noise::default()).unwrap();
        assert_eq!(id.values(), s.depth.values());
        assert_eq!(id.observed_count(), 64 * 64);
        let odd = ScalarField::constant(10, 7, 1.0).unwrap();
        let o = apply_downsample(&odd, &DownsampleOp::GridSubsample { factor: 3 }, Noise::default()).unwrap();
        assert_eq!(o.observed_count(), 4 * 3);
        assert!(matches!(
            apply_downsample(&odd, &DownsampleOp::GridSubsample { factor: 8 }, Noise::default()),
            Err(Error::FactorTooLarge { .. })
        ));
    }

    #[test]
    fn nearest_rounds_half_up() {
        let obs = apply_downsample(
            &ScalarField::from_fn(8, 1, |_, c| c as f64).unwrap(),
            &DownsampleOp::GridSubsample { factor: 1 },
            Noise::default(),
        )
        .unwrap();
        assert_eq!(grid_factor(&obs).unwrap(), 1);
        let field = ScalarField::from_fn(8, 8, |r, c| (r * 8 + c) as f64).unwrap();
        let obs = apply_downsample(&field, &DownsampleOp::GridSubsample { factor: 2 }, Noise::default()).unwrap();
        let n = baseline_nearest(&obs).unwrap();
        // column 1 is halfway between samples 0 and 2: rounds up to 2
        assert_eq!(n.get(0, 1), 2.0);
        assert_eq!(n.get(0, 7), 6.0);
        assert_eq!(n.get(3, 0), 32.0);
    }

    #[test]
    fn catmull_rom_partition_of_unity() {
        for t in [0.0, 0.25, 0.5, 0.9] {
            let w = catmull_rom(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let first_moment: f64 = w.iter().enumerate().map(|(i, v)| (i as f64 - 1.0) * v).sum();
            assert!((first_moment - t).abs() < 1e-15);
        }
        assert_eq!(catmull_rom(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn non_grid_masks_rejected() {
        let f = ScalarField::constant(6, 6, 1.0).unwrap();
        let mut m = vec![false; 36];
        m[0] = true;
        m[8] = true;
        let obs = f.clone().with_mask(m).unwrap();
        assert_eq!(baseline_bicubic(&obs).unwrap_err(), Error::NotGridObservations);
        assert_eq!(baseline_nearest(&obs).unwrap_err(), Error::NotGridObservations);
        let interp = interpolate_observations(&obs).unwrap();
        assert!(interp.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn chebyshev_reach_matches_brute_force() {
        let (w, h) = (9, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mask: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.1)).collect();
            if !mask.iter().any(|&b| b) {
                continue;
            }
            let brute = (0..w * h)
                .map(|p| {
                    (0..w * h)
                        .filter(|&q| mask[q])
                        .map(|q| ((p / w).abs_diff(q / w)).max((p % w).abs_diff(q % w)))
                        .min()
                        .unwrap()
                })
                .max()
                .unwrap();
            assert_eq!(chebyshev_reach(&mask, w, h), brute);
        }
    }

    #[test]
    fn corruption_rates() {
        let gt = SemanticField::one_hot(2, 2, 2, &[0, 1, 1, 0]).unwrap();
        assert_eq!(corrupt_semantics(&gt, 0.0, 0.0, 1).unwrap(), gt);
        let flipped = corrupt_semantics(&gt, 1.0, 0.3, 1).unwrap();
        assert_eq!(crate::superres::hard_labels(&flipped), vec![1, 0, 0, 1]);
        assert!((flipped.pixel(0)[1] - 0.85).abs() < 1e-12);
        assert_eq!(corrupt_semantics(&gt, 1.5, 0.0, 0).unwrap_err(), Error::BadRate);
        assert_eq!(corrupt_semantics(&gt, 0.5, -0.1, 0).unwrap_err(), Error::BadRate);
    }
}
