//! RGB images and fully labeled camera+LiDAR samples.

use crate::calib::CalibrationSet;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Dense H x W x 3 image with values in [0, 1], row-major, channels interleaved.
#[derive(Clone, Debug)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height * 3] }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}x3", width, height),
                right: format!("{} values", data.len()),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Marker for pixels that carry no class (outside the camera frustum or
/// invalid range pixels).
pub const NO_CLASS: u32 = u32::MAX;

/// Dense H x W grid of class ids, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassGrid {
    width: usize,
    height: usize,
    data: Vec<u32>,
}

impl ClassGrid {
    /// All-background grid (class 0).
    pub fn filled(width: usize, height: usize, class: u32) -> Self {
        Self { width, height, data: vec![class; width * height] }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                left: format!("{width}x{height}"),
                right: format!("{} values", data.len()),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, class: u32) {
        self.data[y * self.width + x] = class;
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }
}

/// A calibrated LiDAR sweep with per-point class labels and the matching
/// RGB frame.
#[derive(Clone, Debug)]
pub struct LabeledScene {
    pub cloud: PointCloud,
    pub per_point_class: Vec<u32>,
    pub rgb: RgbImage,
    pub calib: CalibrationSet,
}

impl LabeledScene {
    pub fn new(
        cloud: PointCloud,
        per_point_class: Vec<u32>,
        rgb: RgbImage,
        calib: CalibrationSet,
    ) -> Result<Self> {
        if per_point_class.len() != cloud.len() {
            return Err(Error::Parameter(format!(
                "label count {} does not match point count {}",
                per_point_class.len(),
                cloud.len()
            )));
        }
        Ok(Self { cloud, per_point_class, rgb, calib })
    }
}
