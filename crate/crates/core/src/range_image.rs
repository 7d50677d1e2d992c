//! Dense native range representation of a LiDAR sweep.
//!
//! Points are binned into a W x H grid: the column comes from the azimuth
//! angle, the row either from the beam id (the native mode) or from a uniform
//! zenith discretization. Each valid pixel stores five channels: the Cartesian
//! coordinates, the range and the intensity. When several points fall into the
//! same cell, the one whose azimuth is nearest to the cell center wins; ties
//! go to the earlier point, so the result does not depend on scheduling.

use std::io::{Read, Write};
use std::path::Path;

use crate::cloud::{LidarPoint, PointCloud};
use crate::error::{Error, Result};

pub const CHANNELS: usize = 5;

const MAGIC: &[u8; 4] = b"RIMG";
const FORMAT_VERSION: u32 = 1;

/// Grid geometry: azimuth bins horizontally, beams (or zenith bins) vertically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub azimuth_min: f64,
    pub azimuth_max: f64,
}

impl GridConfig {
    pub fn new(width: usize, height: usize, azimuth_min: f64, azimuth_max: f64) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::Parameter("grid must be at least 1x1".into()));
        }
        if !(azimuth_max > azimuth_min) {
            return Err(Error::Parameter(format!(
                "azimuth_max {azimuth_max} must exceed azimuth_min {azimuth_min}"
            )));
        }
        Ok(Self { width, height, azimuth_min, azimuth_max })
    }

    /// Azimuth width of one column.
    pub fn azimuth_step(&self) -> f64 {
        (self.azimuth_max - self.azimuth_min) / self.width as f64
    }

    /// Azimuth of the center of column `col`.
    pub fn column_center(&self, col: usize) -> f64 {
        self.azimuth_min + (col as f64 + 0.5) * self.azimuth_step()
    }
}

impl Default for GridConfig {
    /// 512 azimuth bins by 64 beams over the 90 degree frontal field of view.
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_4;
        Self { width: 512, height: 64, azimuth_min: -FRAC_PI_4, azimuth_max: FRAC_PI_4 }
    }
}

/// How a point is assigned to an image row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RowMode {
    /// Row = beam id; the cloud must carry beam ids.
    BeamId,
    /// Row = floor((zenith - zenith_min) / zenith_step).
    Spherical { zenith_min: f64, zenith_step: f64 },
}

/// One valid pixel's channel values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangePixel {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub range: f64,
    pub intensity: f64,
}

/// Dense H x W x 5 grid of (x, y, z, range, intensity) plus a validity mask.
///
/// Invalid pixels carry all-zero channels. `source_index` links each valid
/// pixel back to the point it came from (absent on deserialized images).
#[derive(Clone, Debug)]
pub struct RangeImage {
    width: usize,
    height: usize,
    azimuth_min: f64,
    azimuth_max: f64,
    channels: Vec<f64>,
    valid: Vec<bool>,
    source_index: Option<Vec<usize>>,
}

/// Azimuth of a point: `arcsin(y / sqrt(x^2 + y^2))`.
///
/// This form only covers the forward hemisphere (x > 0), which matches the
/// frontal field of view the grid is built for.
pub fn azimuth_of(x: f64, y: f64) -> Result<f64> {
    let norm = (x * x + y * y).sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok((y / norm).asin())
}

/// Zenith of a point: `arcsin(z / sqrt(x^2 + y^2 + z^2))`.
pub fn zenith_of(x: f64, y: f64, z: f64) -> Result<f64> {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok((z / norm).asin())
}

/// Discretize a cloud onto the grid.
///
/// Points with azimuth outside `[azimuth_min, azimuth_max)` are dropped, as
/// are points falling outside the row range. Cell collisions keep the point
/// whose azimuth is closest to the cell center, ties broken by the smaller
/// original point index.
pub fn build_range_image(cloud: &PointCloud, cfg: &GridConfig, mode: RowMode) -> Result<RangeImage> {
    if let RowMode::Spherical { zenith_step, .. } = mode {
        if !(zenith_step > 0.0) {
            return Err(Error::Parameter("zenith_step must be positive".into()));
        }
    }
    let beam_ids = match mode {
        RowMode::BeamId => {
            let ids = cloud.beam_ids().ok_or(Error::MissingBeamIds)?;
            if let Some(&bad) = ids.iter().find(|&&b| (b as usize) >= cfg.height) {
                return Err(Error::BeamIdOutOfRange { beam: bad, rows: cfg.height });
            }
            Some(ids)
        }
        RowMode::Spherical { .. } => None,
    };

    let mut img = RangeImage::empty(cfg);
    // Distance from the winning point's azimuth to its cell center, per cell.
    let mut best_dist = vec![f64::INFINITY; cfg.width * cfg.height];
    let step = cfg.azimuth_step();

    for (index, p) in cloud.points().iter().enumerate() {
        let Ok(az) = azimuth_of(p.x, p.y) else { continue };
        if az < cfg.azimuth_min || az >= cfg.azimuth_max {
            continue;
        }
        let col = ((az - cfg.azimuth_min) / step).floor() as usize;
        if col >= cfg.width {
            continue;
        }
        let row = match (mode, beam_ids) {
            (RowMode::BeamId, Some(ids)) => ids[index] as usize,
            (RowMode::Spherical { zenith_min, zenith_step }, _) => {
                let Ok(zen) = zenith_of(p.x, p.y, p.z) else { continue };
                if zen < zenith_min {
                    continue;
                }
                let r = ((zen - zenith_min) / zenith_step).floor() as usize;
                if r >= cfg.height {
                    continue;
                }
                r
            }
            _ => unreachable!(),
        };
        let cell = row * cfg.width + col;
        let dist = (az - cfg.column_center(col)).abs();
        if dist < best_dist[cell] {
            best_dist[cell] = dist;
            img.store(row, col, p, index);
        }
    }
    Ok(img)
}

/// Emit one point per valid pixel, in row-major order, from the stored channels.
pub fn round_trip_points(img: &RangeImage) -> PointCloud {
    let points = img
        .valid_pixels()
        .map(|(_, _, px)| LidarPoint::new(px.x, px.y, px.z, px.intensity))
        .collect();
    // Channel values came from a finite cloud, so this cannot fail.
    PointCloud::new(points).expect("range image channels are finite")
}

impl RangeImage {
    fn empty(cfg: &GridConfig) -> Self {
        Self {
            width: cfg.width,
            height: cfg.height,
            azimuth_min: cfg.azimuth_min,
            azimuth_max: cfg.azimuth_max,
            channels: vec![0.0; cfg.width * cfg.height * CHANNELS],
            valid: vec![false; cfg.width * cfg.height],
            source_index: Some(vec![usize::MAX; cfg.width * cfg.height]),
        }
    }

    fn store(&mut self, row: usize, col: usize, p: &LidarPoint, index: usize) {
        let cell = row * self.width + col;
        let base = cell * CHANNELS;
        self.channels[base] = p.x;
        self.channels[base + 1] = p.y;
        self.channels[base + 2] = p.z;
        self.channels[base + 3] = p.range();
        self.channels[base + 4] = p.intensity;
        self.valid[cell] = true;
        if let Some(src) = &mut self.source_index {
            src[cell] = index;
        }
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

    /// Azimuth field of view as (min, max) radians.
    pub fn fov(&self) -> (f64, f64) {
        (self.azimuth_min, self.azimuth_max)
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig {
            width: self.width,
            height: self.height,
            azimuth_min: self.azimuth_min,
            azimuth_max: self.azimuth_max,
        }
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Channel values at a pixel, `None` when the pixel is invalid.
    pub fn pixel(&self, row: usize, col: usize) -> Option<RangePixel> {
        let cell = row * self.width + col;
        if !self.valid[cell] {
            return None;
        }
        let base = cell * CHANNELS;
        Some(RangePixel {
            x: self.channels[base],
            y: self.channels[base + 1],
            z: self.channels[base + 2],
            range: self.channels[base + 3],
            intensity: self.channels[base + 4],
        })
    }

    /// Index of the original point stored at a valid pixel. `None` for invalid
    /// pixels and for images read back from disk.
    pub fn source_index(&self, row: usize, col: usize) -> Option<usize> {
        let cell = row * self.width + col;
        if !self.valid[cell] {
            return None;
        }
        self.source_index.as_ref().map(|src| src[cell])
    }

    /// Iterate over valid pixels as (row, col, channels), row-major.
    pub fn valid_pixels(&self) -> impl Iterator<Item = (usize, usize, RangePixel)> + '_ {
        (0..self.height).flat_map(move |row| {
            (0..self.width).filter_map(move |col| self.pixel(row, col).map(|p| (row, col, p)))
        })
    }

    /// Raw channel planes interleaved per pixel, row-major. Invalid pixels are
    /// all zero.
    pub fn channel_data(&self) -> &[f64] {
        &self.channels
    }

    /// Serialize: magic, version, width, height, fov, float32 channels
    /// (row-major, interleaved), then one mask byte per pixel.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(self.width as u32).to_le_bytes())?;
        out.write_all(&(self.height as u32).to_le_bytes())?;
        out.write_all(&self.azimuth_min.to_le_bytes())?;
        out.write_all(&self.azimuth_max.to_le_bytes())?;
        for &v in &self.channels {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        let mask: Vec<u8> = self.valid.iter().map(|&v| v as u8).collect();
        out.write_all(&mask)?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R, name: &str) -> Result<Self> {
        let err = |detail: String| Error::Format { path: name.to_string(), detail };
        let mut head = [0u8; 4];
        input.read_exact(&mut head)?;
        if &head != MAGIC {
            return Err(err(format!("bad magic {head:?}")));
        }
        let version = read_u32(input)?;
        if version != FORMAT_VERSION {
            return Err(err(format!("unsupported version {version}")));
        }
        let width = read_u32(input)? as usize;
        let height = read_u32(input)? as usize;
        let azimuth_min = read_f64(input)?;
        let azimuth_max = read_f64(input)?;
        if width < 1 || height < 1 || !(azimuth_max > azimuth_min) {
            return Err(err(format!("bad header {width}x{height} fov [{azimuth_min}, {azimuth_max})")));
        }
        let mut channels = vec![0.0f64; width * height * CHANNELS];
        let mut buf = [0u8; 4];
        for v in channels.iter_mut() {
            input.read_exact(&mut buf)?;
            *v = f32::from_le_bytes(buf) as f64;
        }
        let mut mask = vec![0u8; width * height];
        input.read_exact(&mut mask)?;
        Ok(Self {
            width,
            height,
            azimuth_min,
            azimuth_max,
            channels,
            valid: mask.into_iter().map(|b| b != 0).collect(),
            source_index: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice(), &path.display().to_string())
    }
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
