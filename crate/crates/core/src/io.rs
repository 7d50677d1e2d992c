//! On-disk formats: KITTI velodyne binaries, KITTI calibration text files,
//! per-point label files and the native extended point format.
//!
//! All numeric fields are little-endian.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4};

use crate::calib::CalibrationSet;
use crate::cloud::{LidarPoint, PointCloud};
use crate::error::{Error, Result};

/// Bytes per point in the KITTI velodyne format: x, y, z, reflectance as f32.
const KITTI_POINT_BYTES: usize = 16;
/// Bytes per point in the extended format: the four f32 fields plus a u32 beam id.
const EXTENDED_POINT_BYTES: usize = 20;

/// Load a KITTI velodyne binary: consecutive little-endian float32 quadruples
/// (x, y, z, reflectance). The result carries no beam ids.
pub fn load_kitti_velodyne(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path)?;
    if bytes.len() % KITTI_POINT_BYTES != 0 {
        return Err(format_error(
            path,
            format!(
                "truncated point record at byte offset {} (file size {} is not a multiple of {})",
                bytes.len() - bytes.len() % KITTI_POINT_BYTES,
                bytes.len(),
                KITTI_POINT_BYTES
            ),
        ));
    }
    let mut points = Vec::with_capacity(bytes.len() / KITTI_POINT_BYTES);
    for chunk in bytes.chunks_exact(KITTI_POINT_BYTES) {
        points.push(LidarPoint::new(
            read_f32(chunk, 0) as f64,
            read_f32(chunk, 4) as f64,
            read_f32(chunk, 8) as f64,
            read_f32(chunk, 12) as f64,
        ));
    }
    PointCloud::new(points)
}

/// Write a cloud in the 16-byte-per-point KITTI format, dropping beam ids.
pub fn save_kitti_velodyne(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(cloud.len() * KITTI_POINT_BYTES);
    for p in cloud.points() {
        push_f32(&mut bytes, p.x as f32);
        push_f32(&mut bytes, p.y as f32);
        push_f32(&mut bytes, p.z as f32);
        push_f32(&mut bytes, p.intensity as f32);
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Load the native extended format: 20-byte records of x, y, z, intensity
/// (f32) followed by the beam id (u32).
pub fn load_native_extended(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path)?;
    if bytes.len() % EXTENDED_POINT_BYTES != 0 {
        return Err(format_error(
            path,
            format!(
                "truncated point record at byte offset {} (file size {} is not a multiple of {})",
                bytes.len() - bytes.len() % EXTENDED_POINT_BYTES,
                bytes.len(),
                EXTENDED_POINT_BYTES
            ),
        ));
    }
    let count = bytes.len() / EXTENDED_POINT_BYTES;
    let mut points = Vec::with_capacity(count);
    let mut beam_ids = Vec::with_capacity(count);
    for chunk in bytes.chunks_exact(EXTENDED_POINT_BYTES) {
        points.push(LidarPoint::new(
            read_f32(chunk, 0) as f64,
            read_f32(chunk, 4) as f64,
            read_f32(chunk, 8) as f64,
            read_f32(chunk, 12) as f64,
        ));
        beam_ids.push(u32::from_le_bytes(chunk[16..20].try_into().unwrap()));
    }
    PointCloud::with_beam_ids(points, beam_ids)
}

/// Write the native extended format. The cloud must carry beam ids.
pub fn save_native_extended(cloud: &PointCloud, path: &Path) -> Result<()> {
    let beam_ids = cloud.beam_ids().ok_or(Error::MissingBeamIds)?;
    let mut bytes = Vec::with_capacity(cloud.len() * EXTENDED_POINT_BYTES);
    for (p, &beam) in cloud.points().iter().zip(beam_ids) {
        push_f32(&mut bytes, p.x as f32);
        push_f32(&mut bytes, p.y as f32);
        push_f32(&mut bytes, p.z as f32);
        push_f32(&mut bytes, p.intensity as f32);
        bytes.extend_from_slice(&beam.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Load a label file: one little-endian u32 class id per point.
pub fn load_labels(path: &Path) -> Result<Vec<u32>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 4 != 0 {
        return Err(format_error(
            path,
            format!("label file size {} is not a multiple of 4", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn save_labels(labels: &[u32], path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(labels.len() * 4);
    for &l in labels {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Parse a KITTI calibration text file with lines `KEY: v1 v2 ... vN` and
/// compose the projection from `P2`, `R0_rect` and `Tr_velo_to_cam`.
pub fn load_kitti_calibration(path: &Path) -> Result<CalibrationSet> {
    let text = fs::read_to_string(path)?;
    let p2 = parse_key(path, &text, "P2", 12)?;
    let r0 = parse_key(path, &text, "R0_rect", 9)?;
    let tr = parse_key(path, &text, "Tr_velo_to_cam", 12)?;
    CalibrationSet::new(
        Matrix3x4::from_row_slice(&p2),
        Matrix3::from_row_slice(&r0),
        Matrix3x4::from_row_slice(&tr),
    )
}

fn parse_key(path: &Path, text: &str, key: &str, expected: usize) -> Result<Vec<f64>> {
    for line in text.lines() {
        let Some((name, rest)) = line.split_once(':') else { continue };
        if name.trim() != key {
            continue;
        }
        let mut values = Vec::with_capacity(expected);
        for token in rest.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| {
                format_error(path, format!("key {key}: cannot parse value {token:?}"))
            })?;
            values.push(v);
        }
        if values.len() != expected {
            return Err(format_error(
                path,
                format!("key {key}: expected {expected} values, found {}", values.len()),
            ));
        }
        return Ok(values);
    }
    Err(format_error(path, format!("missing key {key}")))
}

fn format_error(path: &Path, detail: String) -> Error {
    Error::Format { path: path.display().to_string(), detail }
}

fn read_f32(bytes: &[u8], offset: usize) -> f32 {
    f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

fn push_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}
