//! Projection of LiDAR points into RGB pixel coordinates and the resulting
//! range-pixel to RGB-pixel correspondences.
//!
//! Pixel coordinates use the pixel-center convention throughout: (0, 0) is the
//! center of the top-left pixel, so an image of width W spans [0, W-1] with
//! closed bounds.

use nalgebra::Matrix3x4;

use crate::calib::CalibrationSet;
use crate::error::{Error, Result};
use crate::range_image::RangeImage;

/// Minimum depth in front of the camera for a projection to count.
pub const EPS_DEPTH: f64 = 1e-6;

/// One range pixel paired with its continuous position in the RGB image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    /// (column, row) in the range image, pixel centers.
    pub range_px: (f64, f64),
    /// (u, v) in the RGB image, pixel centers.
    pub rgb_px: (f64, f64),
}

/// All correspondences of one sample, one per integer range pixel at most.
#[derive(Clone, Debug)]
pub struct CorrespondenceSet {
    pub items: Vec<Correspondence>,
    pub rgb_size: (usize, usize),
    pub range_size: (usize, usize),
}

impl CorrespondenceSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Range-image coordinates of every correspondence.
    pub fn range_coords(&self) -> Vec<[f64; 2]> {
        self.items.iter().map(|c| [c.range_px.0, c.range_px.1]).collect()
    }

    /// RGB coordinates of every correspondence.
    pub fn rgb_coords(&self) -> Vec<[f64; 2]> {
        self.items.iter().map(|c| [c.rgb_px.0, c.rgb_px.1]).collect()
    }

    /// Keep only the listed items (e.g. a control-point subsample).
    pub fn subset(&self, indices: &[usize]) -> CorrespondenceSet {
        CorrespondenceSet {
            items: indices.iter().map(|&i| self.items[i]).collect(),
            rgb_size: self.rgb_size,
            range_size: self.range_size,
        }
    }
}

/// Apply the 3x4 projection to a 3D point and dehomogenize.
///
/// Fails when the projective depth is at or below [`EPS_DEPTH`], i.e. the
/// point is behind (or numerically on) the camera plane.
pub fn project_point(p: &Matrix3x4<f64>, x: f64, y: f64, z: f64) -> Result<(f64, f64)> {
    let a = p[(0, 0)] * x + p[(0, 1)] * y + p[(0, 2)] * z + p[(0, 3)];
    let b = p[(1, 0)] * x + p[(1, 1)] * y + p[(1, 2)] * z + p[(1, 3)];
    let w = p[(2, 0)] * x + p[(2, 1)] * y + p[(2, 2)] * z + p[(2, 3)];
    if w <= EPS_DEPTH {
        return Err(Error::BehindCamera { depth: w, eps: EPS_DEPTH });
    }
    Ok((a / w, b / w))
}

/// Project every valid range pixel and keep those that land inside the RGB
/// image. Behind-camera and out-of-image pixels are silently excluded; they
/// have no RGB counterpart.
pub fn build_correspondences(
    img: &RangeImage,
    calib: &CalibrationSet,
    rgb_size: (usize, usize),
) -> CorrespondenceSet {
    let (rgb_w, rgb_h) = rgb_size;
    let max_u = (rgb_w - 1) as f64;
    let max_v = (rgb_h - 1) as f64;
    let mut items = Vec::new();
    for (row, col, px) in img.valid_pixels() {
        let Ok((u, v)) = project_point(&calib.composed_projection, px.x, px.y, px.z) else {
            continue;
        };
        if u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v {
            items.push(Correspondence {
                range_px: (col as f64, row as f64),
                rgb_px: (u, v),
            });
        }
    }
    CorrespondenceSet { items, rgb_size, range_size: img.size() }
}
