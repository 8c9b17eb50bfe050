//! Depth and labelling metrics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SemanticField};
use crate::superres::hard_labels;

/// Root-mean-square error over the pixels where `valid` is true (all pixels
/// when `None`).
pub fn rmse(pred: &ScalarField, gt: &ScalarField, valid: Option<&[bool]>) -> Result<f64> {
    if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
        return Err(Error::DimMismatch("prediction and ground truth grids differ"));
    }
    if let Some(v) = valid {
        if v.len() != pred.len() {
            return Err(Error::LengthMismatch {
                expected: pred.len(),
                actual: v.len(),
            });
        }
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, (p, g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if valid.is_none_or(|v| v[i]) {
            sum += (p - g) * (p - g);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(libm::sqrt(sum / count as f64))
}

/// Labelling accuracy of hard (argmax) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAccuracy {
    pub per_pixel: f64,
    /// Mean recall over classes present in the ground truth.
    pub per_class: f64,
    /// Ground-truth pixels per class.
    pub class_counts: Vec<usize>,
}

pub fn label_accuracy(pred: &SemanticField, gt: &SemanticField) -> Result<LabelAccuracy> {
    if (pred.width(), pred.height(), pred.num_classes()) != (gt.width(), gt.height(), gt.num_classes()) {
        return Err(Error::DimMismatch("semantic fields differ in shape"));
    }
    let l = gt.num_classes();
    let (p, g) = (hard_labels(pred), hard_labels(gt));
    let mut counts = vec![0usize; l];
    let mut hits = vec![0usize; l];
    for (&a, &b) in p.iter().zip(&g) {
        counts[b] += 1;
        if a == b {
            hits[b] += 1;
        }
    }
    let present: Vec<usize> = (0..l).filter(|&c| counts[c] > 0).collect();
    let per_class = present.iter().map(|&c| hits[c] as f64 / counts[c] as f64).sum::<f64>() / present.len() as f64;
    Ok(LabelAccuracy {
        per_pixel: hits.iter().sum::<usize>() as f64 / g.len() as f64,
        per_class,
        class_counts: counts,
    })
}

/// `(baseline − ours) / baseline`: positive when ours is better.
pub fn relative_improvement(ours_rmse: f64, baseline_rmse: f64) -> Result<f64> {
    if !(baseline_rmse > 0.0) {
        return Err(Error::ZeroBaseline);
    }
    Ok((baseline_rmse - ours_rmse) / baseline_rmse)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    pub labels: Option<LabelAccuracy>,
    pub relative_improvement: Option<f64>,
}

impl MetricsReport {
    /// Depth RMSE, plus label accuracy when both semantic fields are given
    /// and the improvement over a baseline prediction when one is given.
    pub fn compute(
        pred: &ScalarField,
        gt: &ScalarField,
        valid: Option<&[bool]>,
        baseline: Option<&ScalarField>,
        semantics: Option<(&SemanticField, &SemanticField)>,
    ) -> Result<Self> {
        let r = rmse(pred, gt, valid)?;
        let relative_improvement = match baseline {
            Some(b) => Some(relative_improvement(r, rmse(b, gt, valid)?)?),
            None => None,
        };
        let labels = match semantics {
            Some((p, g)) => Some(label_accuracy(p, g)?),
            None => None,
        };
        Ok(Self {
            rmse: r,
            labels,
            relative_improvement,
        })
    }
}
