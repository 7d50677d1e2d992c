//! The warping pipeline: compute query positions for each range feature
//! layer, evaluate the shared spline, sample the RGB features bilinearly and
//! concatenate them with the range features.
//!
//! Coordinates follow the pixel-center convention on both sides: feature
//! pixel `i` at stride `s` sits at source coordinate `(i + 0.5) * s - 0.5`,
//! so an identity setup warps onto itself exactly. The spline is fitted once
//! per sample and the same coefficients serve every layer pair.

use std::sync::Arc;
use std::time::Instant;

use crate::calib::CalibrationSet;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::projection::build_correspondences;
use crate::range_image::{build_range_image, GridConfig, RowMode};
use crate::sampling::{
    bilinear_sample_into, farthest_point_sample, resolve_seed, FeatureGrid, SeedPolicy,
};
use crate::scene::RgbImage;
use crate::spline::{fit_spline, SplineWarp};

/// One fusion connection: a range-side feature stride paired with the
/// RGB-side feature stride it receives.
#[derive(Clone, Debug)]
pub struct LayerPair {
    pub range_stride: f64,
    pub rgb_stride: f64,
    pub label: String,
}

/// The full fusion recipe: layer pairs, control-point budget and the spline
/// regularization.
#[derive(Clone, Debug)]
pub struct FusionPlan {
    pub layer_pairs: Vec<LayerPair>,
    pub control_count: usize,
    pub lambda: f64,
}

impl FusionPlan {
    pub fn new(layer_pairs: Vec<LayerPair>, control_count: usize, lambda: f64) -> Result<Self> {
        if control_count < 3 {
            return Err(Error::Parameter(format!(
                "control count must be at least 3, got {control_count}"
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Parameter(format!("lambda must be non-negative, got {lambda}")));
        }
        let mut labels = std::collections::HashSet::new();
        for pair in &layer_pairs {
            if !(pair.range_stride > 0.0) || !(pair.rgb_stride > 0.0) {
                return Err(Error::Parameter(format!(
                    "layer {:?}: strides must be positive",
                    pair.label
                )));
            }
            if !labels.insert(pair.label.clone()) {
                return Err(Error::Parameter(format!("duplicate layer label {:?}", pair.label)));
            }
        }
        Ok(Self { layer_pairs, control_count, lambda })
    }

    /// The three standard stride pairs used by the CLI and the benchmarks.
    pub fn standard(control_count: usize, lambda: f64) -> Self {
        let pair = |r: f64, g: f64, label: &str| LayerPair {
            range_stride: r,
            rgb_stride: g,
            label: label.to_string(),
        };
        Self::new(
            vec![pair(4.0, 8.0, "p4"), pair(8.0, 16.0, "p8"), pair(16.0, 32.0, "p16")],
            control_count,
            lambda,
        )
        .expect("standard plan is valid")
    }
}

/// Produces one feature grid per level from a stride-1 input grid.
pub trait FeatureExtractor {
    fn extract(&self, input: &FeatureGrid) -> Result<Vec<FeatureGrid>>;
}

/// Deterministic stand-in for a CNN encoder: level 0 is the raw input, each
/// following pyramid level is a 2x2 average pooling of the previous one, and
/// channels are replicated cyclically (or truncated) to the requested count.
#[derive(Clone, Debug)]
pub struct StubExtractor {
    levels: Vec<(usize, usize)>,
}

/// Build a stub extractor from (stride, channels) level descriptions.
/// Strides must be non-decreasing powers of two.
pub fn make_stub_extractor(levels: &[(usize, usize)]) -> Result<StubExtractor> {
    let mut prev = 1;
    for &(stride, channels) in levels {
        if channels == 0 {
            return Err(Error::Parameter("stub level needs at least one channel".into()));
        }
        if !stride.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "stub level stride {stride} is not a power of two"
            )));
        }
        if stride < prev {
            return Err(Error::Parameter("stub level strides must be non-decreasing".into()));
        }
        prev = stride;
    }
    Ok(StubExtractor { levels: levels.to_vec() })
}

impl FeatureExtractor for StubExtractor {
    fn extract(&self, input: &FeatureGrid) -> Result<Vec<FeatureGrid>> {
        if input.stride() != 1.0 {
            return Err(Error::Parameter(format!(
                "stub extractor expects a stride-1 input, got stride {}",
                input.stride()
            )));
        }
        let mut pyramid = vec![input.clone()];
        let mut out = Vec::with_capacity(self.levels.len());
        for &(stride, channels) in &self.levels {
            let level = stride.trailing_zeros() as usize;
            while pyramid.len() <= level {
                let pooled = average_pool_2x2(pyramid.last().unwrap());
                pyramid.push(pooled);
            }
            out.push(adapt_channels(&pyramid[level], channels, stride as f64)?);
        }
        Ok(out)
    }
}

// 2x2 mean pooling with partial windows at the right/bottom edges.
fn average_pool_2x2(grid: &FeatureGrid) -> FeatureGrid {
    let w = grid.width().div_ceil(2);
    let h = grid.height().div_ceil(2);
    let c = grid.channels();
    let mut data = vec![0.0f32; w * h * c];
    for row in 0..h {
        for col in 0..w {
            let r1 = (2 * row + 1).min(grid.height() - 1);
            let c1 = (2 * col + 1).min(grid.width() - 1);
            let cells = [(2 * row, 2 * col), (2 * row, c1), (r1, 2 * col), (r1, c1)];
            let base = (row * w + col) * c;
            for ch in 0..c {
                let mut sum = 0.0f32;
                for &(r, cc) in &cells {
                    sum += grid.at(r, cc)[ch];
                }
                data[base + ch] = sum / 4.0;
            }
        }
    }
    FeatureGrid::new(w, h, c, grid.stride() * 2.0, grid.source_size(), data)
        .expect("pooled grid fits its source")
}

fn adapt_channels(grid: &FeatureGrid, channels: usize, stride: f64) -> Result<FeatureGrid> {
    let (w, h, src_c) = (grid.width(), grid.height(), grid.channels());
    let mut data = vec![0.0f32; w * h * channels];
    for row in 0..h {
        for col in 0..w {
            let src = grid.at(row, col);
            let base = (row * w + col) * channels;
            for ch in 0..channels {
                data[base + ch] = src[ch % src_c];
            }
        }
    }
    FeatureGrid::new(w, h, channels, stride, grid.source_size(), data)
}

/// Geometry of one range-side feature layer.
#[derive(Clone, Copy, Debug)]
pub struct LayerGeometry {
    pub width: usize,
    pub height: usize,
    pub stride: f64,
    pub source_size: (usize, usize),
}

impl LayerGeometry {
    pub fn of(grid: &FeatureGrid) -> Self {
        Self {
            width: grid.width(),
            height: grid.height(),
            stride: grid.stride(),
            source_size: grid.source_size(),
        }
    }
}

/// Warp an RGB feature grid onto a range feature layer.
///
/// For every range feature pixel: scale to full-resolution range-image
/// coordinates, evaluate the spline into RGB input coordinates, scale into
/// RGB feature coordinates and sample bilinearly (zero outside the grid).
pub fn warp_feature_layer(
    rgb_feat: &FeatureGrid,
    warp: &SplineWarp,
    range_layer: &LayerGeometry,
    rgb_input_size: (usize, usize),
) -> Result<FeatureGrid> {
    if rgb_feat.source_size() != rgb_input_size {
        return Err(Error::ShapeMismatch {
            left: format!("rgb features from {}x{}", rgb_feat.source_size().0, rgb_feat.source_size().1),
            right: format!("rgb input {}x{}", rgb_input_size.0, rgb_input_size.1),
        });
    }
    let mut out = FeatureGrid::zeros(
        range_layer.width,
        range_layer.height,
        rgb_feat.channels(),
        range_layer.stride,
        range_layer.source_size,
    )?;
    let s_r = range_layer.stride;
    let s_rgb = rgb_feat.stride();
    for row in 0..range_layer.height {
        let y = (row as f64 + 0.5) * s_r - 0.5;
        for col in 0..range_layer.width {
            let x = (col as f64 + 0.5) * s_r - 0.5;
            let target = warp.eval_one(x, y);
            let uf = (target[0] + 0.5) / s_rgb - 0.5;
            let vf = (target[1] + 0.5) / s_rgb - 0.5;
            bilinear_sample_into(rgb_feat, uf, vf, out.at_mut(row, col));
        }
    }
    Ok(out)
}

/// Concatenate warped RGB features onto range features, range channels first.
pub fn fuse(range_feat: &FeatureGrid, warped_rgb: &FeatureGrid) -> Result<FeatureGrid> {
    if range_feat.width() != warped_rgb.width()
        || range_feat.height() != warped_rgb.height()
        || range_feat.stride() != warped_rgb.stride()
    {
        return Err(Error::ShapeMismatch {
            left: format!(
                "range {}x{} stride {}",
                range_feat.width(),
                range_feat.height(),
                range_feat.stride()
            ),
            right: format!(
                "rgb {}x{} stride {}",
                warped_rgb.width(),
                warped_rgb.height(),
                warped_rgb.stride()
            ),
        });
    }
    let (w, h) = (range_feat.width(), range_feat.height());
    let c_out = range_feat.channels() + warped_rgb.channels();
    let mut data = Vec::with_capacity(w * h * c_out);
    for row in 0..h {
        for col in 0..w {
            data.extend_from_slice(range_feat.at(row, col));
            data.extend_from_slice(warped_rgb.at(row, col));
        }
    }
    FeatureGrid::new(w, h, c_out, range_feat.stride(), range_feat.source_size(), data)
}

/// Wall-clock duration of one pipeline stage.
#[derive(Clone, Debug)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

/// One fused output layer; `warp` is the shared spline the layer was warped
/// with.
#[derive(Clone, Debug)]
pub struct FusedLayer {
    pub label: String,
    pub grid: FeatureGrid,
    pub warp: Arc<SplineWarp>,
}

/// Everything the pipeline produced for one sample.
#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub layers: Vec<FusedLayer>,
    pub warp: Option<Arc<SplineWarp>>,
    /// Number of spline fits performed; 1 for any plan with layers, 0 for an
    /// empty plan.
    pub fit_count: usize,
    pub correspondence_count: usize,
    pub control_indices: Vec<usize>,
    pub timings: Vec<StageTiming>,
}

impl PipelineResult {
    /// Per-stage milliseconds as `stage=millis` lines.
    pub fn timing_report(&self) -> String {
        self.timings
            .iter()
            .map(|t| format!("{}={:.3}\n", t.stage, t.millis))
            .collect()
    }
}

/// Run the full geometric pipeline on one sample: range image, projection,
/// farthest point sampling, one spline fit, then warp + fuse per layer pair.
#[allow(clippy::too_many_arguments)]
pub fn run_fusion_pipeline(
    cloud: &PointCloud,
    rgb: &RgbImage,
    calib: &CalibrationSet,
    cfg: &GridConfig,
    mode: RowMode,
    plan: &FusionPlan,
    rgb_extractor: &dyn FeatureExtractor,
    range_extractor: &dyn FeatureExtractor,
    seed_policy: SeedPolicy,
) -> Result<PipelineResult> {
    let mut timings = Vec::new();
    let mut record = |stage: &str, start: Instant| {
        timings.push(StageTiming {
            stage: stage.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
    };

    let t = Instant::now();
    let img = build_range_image(cloud, cfg, mode)?;
    record("build_range", t);

    let t = Instant::now();
    let corr = build_correspondences(&img, calib, rgb.size());
    record("correspondences", t);
    if corr.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "only {} range-to-RGB correspondences; no warp possible",
            corr.len()
        )));
    }

    let t = Instant::now();
    let k = plan.control_count.min(corr.len());
    let seed = resolve_seed(&corr, seed_policy);
    let control_indices = farthest_point_sample(&corr.range_coords(), k, seed)?;
    record("fps", t);

    let t = Instant::now();
    let rgb_grids = rgb_extractor.extract(&FeatureGrid::from_rgb_image(rgb))?;
    record("extract_rgb", t);
    let t = Instant::now();
    let range_grids = range_extractor.extract(&FeatureGrid::from_range_image(&img))?;
    record("extract_range", t);

    if rgb_grids.len() != plan.layer_pairs.len() || range_grids.len() != plan.layer_pairs.len() {
        return Err(Error::Parameter(format!(
            "extractors produced {}/{} levels for {} layer pairs",
            rgb_grids.len(),
            range_grids.len(),
            plan.layer_pairs.len()
        )));
    }
    for ((pair, rgb_grid), range_grid) in plan.layer_pairs.iter().zip(&rgb_grids).zip(&range_grids) {
        if rgb_grid.stride() != pair.rgb_stride || range_grid.stride() != pair.range_stride {
            return Err(Error::Parameter(format!(
                "layer {:?}: extractor strides ({}, {}) do not match plan ({}, {})",
                pair.label,
                range_grid.stride(),
                rgb_grid.stride(),
                pair.range_stride,
                pair.rgb_stride
            )));
        }
    }

    // Nothing to warp: the spline is not fitted at all.
    if plan.layer_pairs.is_empty() {
        return Ok(PipelineResult {
            layers: Vec::new(),
            warp: None,
            fit_count: 0,
            correspondence_count: corr.len(),
            control_indices,
            timings,
        });
    }

    let t = Instant::now();
    let controls = corr.subset(&control_indices);
    let warp = Arc::new(fit_spline(&controls, plan.lambda)?);
    let fit_count = 1;
    record("fit", t);

    let mut layers = Vec::with_capacity(plan.layer_pairs.len());
    for ((pair, rgb_grid), range_grid) in plan.layer_pairs.iter().zip(&rgb_grids).zip(&range_grids) {
        let t = Instant::now();
        let warped = warp_feature_layer(rgb_grid, &warp, &LayerGeometry::of(range_grid), rgb.size())?;
        record(&format!("warp[{}]", pair.label), t);

        let t = Instant::now();
        let fused = fuse(range_grid, &warped)?;
        record(&format!("fuse[{}]", pair.label), t);

        layers.push(FusedLayer { label: pair.label.clone(), grid: fused, warp: Arc::clone(&warp) });
    }

    Ok(PipelineResult {
        layers,
        warp: Some(warp),
        fit_count,
        correspondence_count: corr.len(),
        control_indices,
        timings,
    })
}
