//! Control-point subsampling and continuous sampling of feature grids.

use crate::error::{Error, Result};
use crate::projection::CorrespondenceSet;
use crate::range_image::{RangeImage, CHANNELS};
use crate::scene::RgbImage;

/// Opaque H x W x C grid of 32-bit features at a known downscale factor
/// relative to its source image.
#[derive(Clone, Debug)]
pub struct FeatureGrid {
    width: usize,
    height: usize,
    channels: usize,
    /// Source-image pixels per feature pixel.
    stride: f64,
    /// Size (W0, H0) of the image this grid was derived from.
    source_size: (usize, usize),
    data: Vec<f32>,
}

impl FeatureGrid {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        stride: f64,
        source_size: (usize, usize),
        data: Vec<f32>,
    ) -> Result<Self> {
        if !(stride > 0.0) {
            return Err(Error::Parameter(format!("stride must be positive, got {stride}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch {
                left: format!("{width}x{height}x{channels}"),
                right: format!("{} values", data.len()),
            });
        }
        // The grid may not cover more than its source image.
        let max_w = (source_size.0 as f64 / stride).ceil() as usize;
        let max_h = (source_size.1 as f64 / stride).ceil() as usize;
        if width > max_w || height > max_h {
            return Err(Error::ShapeMismatch {
                left: format!("grid {width}x{height} at stride {stride}"),
                right: format!("source {}x{}", source_size.0, source_size.1),
            });
        }
        Ok(Self { width, height, channels, stride, source_size, data })
    }

    pub fn zeros(
        width: usize,
        height: usize,
        channels: usize,
        stride: f64,
        source_size: (usize, usize),
    ) -> Result<Self> {
        Self::new(width, height, channels, stride, source_size, vec![0.0; width * height * channels])
    }

    /// An RGB image as a stride-1 three-channel grid.
    pub fn from_rgb_image(img: &RgbImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: 3,
            stride: 1.0,
            source_size: img.size(),
            data: img.data().to_vec(),
        }
    }

    /// A range image's five channels as a stride-1 grid.
    pub fn from_range_image(img: &RangeImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: CHANNELS,
            stride: 1.0,
            source_size: img.size(),
            data: img.channel_data().iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn source_size(&self) -> (usize, usize) {
        self.source_size
    }

    /// Channel slice at a cell.
    pub fn at(&self, row: usize, col: usize) -> &[f32] {
        let base = (row * self.width + col) * self.channels;
        &self.data[base..base + self.channels]
    }

    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut [f32] {
        let base = (row * self.width + col) * self.channels;
        &mut self.data[base..base + self.channels]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Greedy farthest point sampling on 2D coordinates.
///
/// Starts at `seed` and repeatedly adds the point with the largest minimum
/// distance to the already selected set; ties go to the smallest index, so
/// the result is deterministic. Returns the `k` selected indices in selection
/// order.
pub fn farthest_point_sample(points: &[[f64; 2]], k: usize, seed: usize) -> Result<Vec<usize>> {
    let m = points.len();
    if k < 1 || k > m {
        return Err(Error::Parameter(format!(
            "cannot select {k} of {m} points"
        )));
    }
    if seed >= m {
        return Err(Error::Parameter(format!("seed index {seed} out of range for {m} points")));
    }

    let dist2 = |a: [f64; 2], b: [f64; 2]| {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        dx * dx + dy * dy
    };

    let mut selected = Vec::with_capacity(k);
    selected.push(seed);
    // Squared distance to the nearest selected point, per candidate.
    let mut min_d2: Vec<f64> = points.iter().map(|&p| dist2(p, points[seed])).collect();
    while selected.len() < k {
        let mut best = 0;
        let mut best_d2 = f64::NEG_INFINITY;
        for (i, &d2) in min_d2.iter().enumerate() {
            if d2 > best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        selected.push(best);
        for (i, d2) in min_d2.iter_mut().enumerate() {
            let d = dist2(points[i], points[best]);
            if d < *d2 {
                *d2 = d;
            }
        }
    }
    Ok(selected)
}

/// How the first farthest-point-sampling control is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedPolicy {
    /// The correspondence whose range position is closest to the range-image
    /// center; content-independent and deterministic.
    Center,
    /// The first correspondence in scan order.
    Index0,
}

/// Resolve the FPS seed index for a correspondence set.
pub fn resolve_seed(corr: &CorrespondenceSet, policy: SeedPolicy) -> usize {
    match policy {
        SeedPolicy::Index0 => 0,
        SeedPolicy::Center => {
            let (w, h) = corr.range_size;
            let cx = (w as f64 - 1.0) / 2.0;
            let cy = (h as f64 - 1.0) / 2.0;
            let mut best = 0;
            let mut best_d2 = f64::INFINITY;
            for (i, c) in corr.items.iter().enumerate() {
                let dx = c.range_px.0 - cx;
                let dy = c.range_px.1 - cy;
                let d2 = dx * dx + dy * dy;
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = i;
                }
            }
            best
        }
    }
}

/// Bilinear blend of the four grid cells around a continuous position, one
/// value per channel. Positions outside `[0, W-1] x [0, H-1]` yield the zero
/// vector.
///
/// At the exact grid boundary the `floor + 1` neighbor is clamped; its weight
/// is zero there, so the formula stays exact.
pub fn bilinear_sample(grid: &FeatureGrid, x: f64, y: f64) -> Vec<f32> {
    let mut out = vec![0.0f32; grid.channels()];
    bilinear_sample_into(grid, x, y, &mut out);
    out
}

/// [`bilinear_sample`] writing into a caller-provided buffer.
pub fn bilinear_sample_into(grid: &FeatureGrid, x: f64, y: f64, out: &mut [f32]) {
    debug_assert_eq!(out.len(), grid.channels());
    let max_x = (grid.width() - 1) as f64;
    let max_y = (grid.height() - 1) as f64;
    if !(x >= 0.0 && x <= max_x && y >= 0.0 && y <= max_y) {
        out.fill(0.0);
        return;
    }
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(grid.width() - 1);
    let y1 = (y0 + 1).min(grid.height() - 1);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;

    let c00 = grid.at(y0, x0);
    let c01 = grid.at(y0, x1);
    let c10 = grid.at(y1, x0);
    let c11 = grid.at(y1, x1);
    let w00 = (1.0 - fx) * (1.0 - fy);
    let w01 = fx * (1.0 - fy);
    let w10 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    for c in 0..out.len() {
        out[c] = w00 * c00[c] + w01 * c01[c] + w10 * c10[c] + w11 * c11[c];
    }
}
