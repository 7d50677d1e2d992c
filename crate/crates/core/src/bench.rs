//! Control-point scaling benchmark: median wall-clock time of one spline fit
//! plus the dense warps at the standard stride pairs, as a function of the
//! control-point count.

use std::time::Instant;

use crate::calib::CalibrationSet;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::fusion::{warp_feature_layer, FeatureExtractor, FusionPlan, LayerGeometry};
use crate::projection::build_correspondences;
use crate::range_image::{build_range_image, GridConfig, RowMode};
use crate::sampling::{farthest_point_sample, resolve_seed, FeatureGrid, SeedPolicy};
use crate::scene::RgbImage;
use crate::spline::fit_spline;

/// One benchmark table row. `median_ms` is `None` when the row was skipped.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub k: usize,
    pub median_ms: Option<f64>,
    pub note: Option<String>,
}

/// Time fit + warp for each control-point count.
///
/// The range image, correspondences and feature pyramids are prepared once
/// outside the timed region; each repetition then times one spline fit and
/// one dense warp per standard layer pair. The median over repetitions is
/// reported. Counts exceeding the number of available correspondences are
/// skipped with a note.
#[allow(clippy::too_many_arguments)]
pub fn benchmark_control_points(
    cloud: &PointCloud,
    rgb: &RgbImage,
    calib: &CalibrationSet,
    cfg: &GridConfig,
    mode: RowMode,
    counts: &[usize],
    repetitions: usize,
) -> Result<Vec<BenchRow>> {
    if repetitions < 3 {
        return Err(Error::Parameter(format!(
            "need at least 3 repetitions for a stable median, got {repetitions}"
        )));
    }
    let plan = FusionPlan::standard(48, 0.0);
    let img = build_range_image(cloud, cfg, mode)?;
    let corr = build_correspondences(&img, calib, rgb.size());
    if corr.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "only {} correspondences available",
            corr.len()
        )));
    }
    let seed = resolve_seed(&corr, SeedPolicy::Center);
    let range_coords = corr.range_coords();

    let rgb_levels: Vec<(usize, usize)> =
        plan.layer_pairs.iter().map(|p| (p.rgb_stride as usize, 8)).collect();
    let rgb_grids =
        crate::fusion::make_stub_extractor(&rgb_levels)?.extract(&FeatureGrid::from_rgb_image(rgb))?;
    let range_geoms: Vec<LayerGeometry> = plan
        .layer_pairs
        .iter()
        .map(|p| {
            let s = p.range_stride as usize;
            LayerGeometry {
                width: img.width().div_ceil(s),
                height: img.height().div_ceil(s),
                stride: p.range_stride,
                source_size: img.size(),
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(counts.len());
    for &k in counts {
        if k > corr.len() {
            rows.push(BenchRow {
                k,
                median_ms: None,
                note: Some(format!("skipped: only {} correspondences", corr.len())),
            });
            continue;
        }
        let indices = farthest_point_sample(&range_coords, k, seed)?;
        let controls = corr.subset(&indices);
        let mut samples = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            let warp = fit_spline(&controls, plan.lambda)?;
            for (geom, rgb_grid) in range_geoms.iter().zip(&rgb_grids) {
                let warped = warp_feature_layer(rgb_grid, &warp, geom, rgb.size())?;
                std::hint::black_box(&warped);
            }
            samples.push(start.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(BenchRow { k, median_ms: Some(median(&mut samples)), note: None });
    }
    Ok(rows)
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}
