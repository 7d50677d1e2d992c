//! Point cloud container and beam-id reconstruction.
//!
//! A `PointCloud` is an unordered set of LiDAR returns. Beam ids (the index of
//! the laser emitter that produced a return) are stored side-by-side with the
//! points and are either present for every point or for none.

use crate::error::{Error, Result};

/// A single LiDAR return. Coordinates in meters, intensity unitless in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LidarPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

impl LidarPoint {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self { x, y, z, intensity }
    }

    /// Euclidean distance to the sensor origin.
    pub fn range(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Unordered 3D returns with intensity and optional per-point beam ids.
///
/// Immutable after construction; beam ids are all-present or all-absent.
#[derive(Clone, Debug, Default)]
pub struct PointCloud {
    points: Vec<LidarPoint>,
    beam_ids: Option<Vec<u32>>,
}

impl PointCloud {
    /// Build a cloud without beam ids. Rejects non-finite coordinates or
    /// intensities, naming the first offending point.
    pub fn new(points: Vec<LidarPoint>) -> Result<Self> {
        check_finite(&points)?;
        Ok(Self { points, beam_ids: None })
    }

    /// Build a cloud with one beam id per point.
    pub fn with_beam_ids(points: Vec<LidarPoint>, beam_ids: Vec<u32>) -> Result<Self> {
        check_finite(&points)?;
        if points.len() != beam_ids.len() {
            return Err(Error::Parameter(format!(
                "beam id count {} does not match point count {}",
                beam_ids.len(),
                points.len()
            )));
        }
        Ok(Self { points, beam_ids: Some(beam_ids) })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LidarPoint] {
        &self.points
    }

    /// Per-point beam ids, if known.
    pub fn beam_ids(&self) -> Option<&[u32]> {
        self.beam_ids.as_deref()
    }

    pub fn point(&self, index: usize) -> &LidarPoint {
        &self.points[index]
    }
}

fn check_finite(points: &[LidarPoint]) -> Result<()> {
    for (index, p) in points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite() && p.intensity.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

/// Assign beam ids to a cloud recorded in sensor scan order.
///
/// The scanner sweeps each beam through a full revolution before the next one
/// starts, so the full-circle azimuth grows monotonically within a beam and
/// drops by roughly 2π at the boundary. A drop of more than π between
/// consecutive points starts a new beam. The beam counter is clamped to
/// `num_beams - 1`; if more wrap events occur than there are beams, a warning
/// is logged and the excess points stay on the last beam.
pub fn reconstruct_beam_ids(cloud: &PointCloud, num_beams: u32) -> Result<PointCloud> {
    if num_beams < 1 {
        return Err(Error::Parameter("num_beams must be at least 1".into()));
    }
    if cloud.is_empty() {
        return Ok(PointCloud::default());
    }

    let mut beam_ids = Vec::with_capacity(cloud.len());
    let mut beam: u32 = 0;
    let mut wraps_past_last = 0usize;
    let mut prev_az = full_azimuth(cloud.point(0));
    beam_ids.push(0);
    for p in &cloud.points[1..] {
        let az = full_azimuth(p);
        if az - prev_az < -std::f64::consts::PI {
            if beam + 1 < num_beams {
                beam += 1;
            } else {
                wraps_past_last += 1;
            }
        }
        beam_ids.push(beam);
        prev_az = az;
    }
    if wraps_past_last > 0 {
        log::warn!(
            "beam reconstruction saw {wraps_past_last} wrap events beyond {num_beams} beams; \
             excess points assigned to the last beam"
        );
    }
    PointCloud::with_beam_ids(cloud.points.clone(), beam_ids)
}

// Full-circle azimuth in (-π, π]; the arcsin form used for binning only covers
// the forward hemisphere, which is not enough to detect scan wrap-around.
fn full_azimuth(p: &LidarPoint) -> f64 {
    p.y.atan2(p.x)
}
