//! Segmentation evaluation: confusion counts, per-class IoU and the
//! RGB-mask point-label lookup baseline.
//!
//! Class 0 is the background; the mean IoU is taken over the foreground
//! classes only. Pixels masked out (and pixels carrying [`NO_CLASS`]) are
//! counted in `ignore_count` and never influence any IoU value.

use crate::calib::CalibrationSet;
use crate::error::{Error, Result};
use crate::projection::project_point;
use crate::range_image::RangeImage;
use crate::scene::{ClassGrid, NO_CLASS};

/// Class-id to class-id substitution table; ids beyond the table map to
/// themselves. Models label-policy merges such as folding two source classes
/// into one target class.
#[derive(Clone, Debug, Default)]
pub struct ClassRemap {
    table: Vec<u32>,
}

impl ClassRemap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let max = pairs.iter().map(|&(from, _)| from).max().unwrap_or(0);
        let mut table: Vec<u32> = (0..=max).collect();
        for &(from, to) in pairs {
            table[from as usize] = to;
        }
        Self { table }
    }

    pub fn apply(&self, class: u32) -> u32 {
        if class == NO_CLASS {
            return NO_CLASS;
        }
        self.table.get(class as usize).copied().unwrap_or(class)
    }
}

/// Row = ground truth, column = prediction. `ignore_count` holds the pixels
/// excluded from evaluation (masked out or unlabeled).
#[derive(Clone, Debug)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
    ignore_count: u64,
}

impl ConfusionMatrix {
    /// Accumulate over all pixels; `mask` selects the evaluated ones.
    pub fn from_grids(pred: &ClassGrid, gt: &ClassGrid, mask: &[bool]) -> Result<Self> {
        if pred.size() != gt.size() {
            return Err(Error::ShapeMismatch {
                left: format!("pred {}x{}", pred.width(), pred.height()),
                right: format!("gt {}x{}", gt.width(), gt.height()),
            });
        }
        if mask.len() != pred.data().len() {
            return Err(Error::ShapeMismatch {
                left: format!("mask {} entries", mask.len()),
                right: format!("grid {} pixels", pred.data().len()),
            });
        }
        let mut num_classes = 0usize;
        for ((&p, &g), &m) in pred.data().iter().zip(gt.data()).zip(mask) {
            if m && p != NO_CLASS && g != NO_CLASS {
                num_classes = num_classes.max(p as usize + 1).max(g as usize + 1);
            }
        }
        let mut counts = vec![0u64; num_classes * num_classes];
        let mut ignore_count = 0u64;
        for ((&p, &g), &m) in pred.data().iter().zip(gt.data()).zip(mask) {
            if m && p != NO_CLASS && g != NO_CLASS {
                counts[g as usize * num_classes + p as usize] += 1;
            } else {
                ignore_count += 1;
            }
        }
        Ok(Self { num_classes, counts, ignore_count })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn ignore_count(&self) -> u64 {
        self.ignore_count
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    /// Evaluated pixels plus ignored pixels.
    pub fn total_pixels(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.ignore_count
    }

    /// TP / (TP + FP + FN); `None` when the class never occurs.
    pub fn iou(&self, class: usize) -> Option<f64> {
        let tp = self.count(class, class);
        let fp: u64 = (0..self.num_classes).filter(|&g| g != class).map(|g| self.count(g, class)).sum();
        let fn_: u64 = (0..self.num_classes).filter(|&p| p != class).map(|p| self.count(class, p)).sum();
        let denom = tp + fp + fn_;
        if denom == 0 {
            None
        } else {
            Some(tp as f64 / denom as f64)
        }
    }
}

/// Per-class IoU (absent classes are `None`) and the mean over foreground
/// classes.
#[derive(Clone, Debug, PartialEq)]
pub struct IoUReport {
    pub per_class: Vec<Option<f64>>,
    pub mean_over_foreground: Option<f64>,
}

impl IoUReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let per_class: Vec<Option<f64>> = (0..cm.num_classes()).map(|c| cm.iou(c)).collect();
        let foreground: Vec<f64> = per_class.iter().skip(1).filter_map(|&v| v).collect();
        let mean_over_foreground = if foreground.is_empty() {
            None
        } else {
            Some(foreground.iter().sum::<f64>() / foreground.len() as f64)
        };
        Self { per_class, mean_over_foreground }
    }
}

/// Per-class IoU over the masked-in pixels of two class grids.
pub fn compute_iou(pred: &ClassGrid, gt: &ClassGrid, mask: &[bool]) -> Result<IoUReport> {
    Ok(IoUReport::from_confusion(&ConfusionMatrix::from_grids(pred, gt, mask)?))
}

/// Label every valid range pixel by projecting its stored 3D point into an
/// RGB segmentation mask and reading the nearest pixel's class (then applying
/// `remap`). Pixels that are invalid, behind the camera or projected outside
/// the mask get [`NO_CLASS`].
pub fn rgb_mask_lookup_baseline(
    mask_rgb: &ClassGrid,
    img: &RangeImage,
    calib: &CalibrationSet,
    remap: &ClassRemap,
) -> ClassGrid {
    let (w, h) = img.size();
    let max_u = (mask_rgb.width() - 1) as f64;
    let max_v = (mask_rgb.height() - 1) as f64;
    let mut out = ClassGrid::filled(w, h, NO_CLASS);
    for (row, col, px) in img.valid_pixels() {
        let Ok((u, v)) = project_point(&calib.composed_projection, px.x, px.y, px.z) else {
            continue;
        };
        if u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v {
            let class = mask_rgb.get(u.round() as usize, v.round() as usize);
            out.set(col, row, remap.apply(class));
        }
    }
    out
}

/// Ground-truth class grid over the range image: each valid pixel takes the
/// class of its source point, everything else [`NO_CLASS`].
pub fn range_class_grid(img: &RangeImage, per_point_class: &[u32]) -> Result<ClassGrid> {
    let (w, h) = img.size();
    let mut out = ClassGrid::filled(w, h, NO_CLASS);
    for (row, col, _) in img.valid_pixels() {
        let Some(src) = img.source_index(row, col) else {
            return Err(Error::Parameter(
                "range image carries no source indices (was it deserialized?)".into(),
            ));
        };
        let class = per_point_class.get(src).copied().ok_or_else(|| {
            Error::Parameter(format!("source index {src} beyond label count"))
        })?;
        out.set(col, row, class);
    }
    Ok(out)
}
