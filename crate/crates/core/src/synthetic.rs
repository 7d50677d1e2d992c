//! Synthetic calibrated LiDAR+camera scenes, ray-cast against simple
//! primitives. The generator is exact by construction, which makes it the
//! ground-truth source for geometry tests: the calibration is assembled from
//! the same camera that rendered the RGB image, and every return carries the
//! class of the primitive it hit.

use nalgebra::{Matrix3, Matrix3x4, Vector3};

use crate::calib::CalibrationSet;
use crate::cloud::{LidarPoint, PointCloud};
use crate::error::{Error, Result};
use crate::range_image::GridConfig;
use crate::render::class_color;
use crate::scene::{ClassGrid, LabeledScene, RgbImage};

const RAY_EPS: f64 = 1e-9;

/// Scene content: axis-aligned boxes and vertical cylinders, each with a
/// class id (class 0 is reserved for the background).
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Box { min: [f64; 3], max: [f64; 3], class: u32 },
    Cylinder { x: f64, y: f64, radius: f64, z_min: f64, z_max: f64, class: u32 },
}

#[derive(Clone, Debug, Default)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
}

/// Pinhole camera rigidly mounted against the LiDAR frame.
#[derive(Clone, Debug)]
pub struct CameraRig {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// LiDAR-to-camera rotation.
    pub rotation: Matrix3<f64>,
    /// LiDAR-to-camera translation.
    pub translation: Vector3<f64>,
}

impl CameraRig {
    /// A camera looking along the LiDAR forward axis (+x), with the usual
    /// image convention: x right, y down, z forward.
    pub fn forward(width: usize, height: usize, focal: f64, translation: Vector3<f64>) -> Self {
        let rotation = Matrix3::from_rows(&[
            [0.0, -1.0, 0.0].into(),
            [0.0, 0.0, -1.0].into(),
            [1.0, 0.0, 0.0].into(),
        ]);
        Self {
            width,
            height,
            fx: focal,
            fy: focal,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            rotation,
            translation,
        }
    }

    /// [`CameraRig::forward`] with the camera placed exactly at the LiDAR
    /// origin.
    pub fn forward_centered(width: usize, height: usize, focal: f64) -> Self {
        Self::forward(width, height, focal, Vector3::zeros())
    }

    pub fn calibration(&self) -> Result<CalibrationSet> {
        let p2 = Matrix3x4::from_row_slice(&[
            self.fx, 0.0, self.cx, 0.0, //
            0.0, self.fy, self.cy, 0.0, //
            0.0, 0.0, 1.0, 0.0,
        ]);
        let mut tr = Matrix3x4::zeros();
        tr.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        tr.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        CalibrationSet::new(p2, Matrix3::identity(), tr)
    }

    /// Camera center and per-pixel ray direction, both in LiDAR coordinates.
    fn pixel_ray(&self, u: f64, v: f64) -> (Vector3<f64>, Vector3<f64>) {
        let origin = -self.rotation.transpose() * self.translation;
        let dir_cam = Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        (origin, self.rotation.transpose() * dir_cam)
    }
}

/// Virtual scanner: one ray per (beam, azimuth step), azimuths at bin centers.
#[derive(Clone, Debug)]
pub struct RigSpec {
    pub beam_elevations: Vec<f64>,
    pub azimuth_steps: usize,
    pub azimuth_min: f64,
    pub azimuth_max: f64,
    pub camera: CameraRig,
}

impl RigSpec {
    pub fn grid_config(&self) -> Result<GridConfig> {
        GridConfig::new(
            self.azimuth_steps,
            self.beam_elevations.len(),
            self.azimuth_min,
            self.azimuth_max,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.beam_elevations.is_empty() {
            return Err(Error::Parameter("rig needs at least one beam".into()));
        }
        if self.azimuth_steps == 0 {
            return Err(Error::Parameter("rig needs at least one azimuth step".into()));
        }
        if self.camera.width == 0 || self.camera.height == 0 {
            return Err(Error::Parameter("camera image must be at least 1x1".into()));
        }
        if self.camera.fx == 0.0 || self.camera.fy == 0.0 {
            return Err(Error::Parameter("camera focal lengths must be non-zero".into()));
        }
        Ok(())
    }
}

fn ray_box(o: &Vector3<f64>, d: &Vector3<f64>, min: &[f64; 3], max: &[f64; 3]) -> Option<f64> {
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        if d[axis].abs() < 1e-15 {
            if o[axis] < min[axis] || o[axis] > max[axis] {
                return None;
            }
        } else {
            let inv = 1.0 / d[axis];
            let mut a = (min[axis] - o[axis]) * inv;
            let mut b = (max[axis] - o[axis]) * inv;
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t_enter = t_enter.max(a);
            t_exit = t_exit.min(b);
            if t_enter > t_exit {
                return None;
            }
        }
    }
    if t_enter >= RAY_EPS {
        Some(t_enter)
    } else if t_exit >= RAY_EPS {
        // Origin inside the box: first surface ahead is the exit face.
        Some(t_exit)
    } else {
        None
    }
}

// Side surface of a vertical cylinder, clipped to [z_min, z_max].
fn ray_cylinder(
    o: &Vector3<f64>,
    d: &Vector3<f64>,
    cx: f64,
    cy: f64,
    radius: f64,
    z_min: f64,
    z_max: f64,
) -> Option<f64> {
    let ox = o.x - cx;
    let oy = o.y - cy;
    let a = d.x * d.x + d.y * d.y;
    if a < 1e-16 {
        return None;
    }
    let b = 2.0 * (ox * d.x + oy * d.y);
    let c = ox * ox + oy * oy - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
        if t >= RAY_EPS {
            let z = o.z + t * d.z;
            if z >= z_min && z <= z_max {
                return Some(t);
            }
        }
    }
    None
}

/// Nearest hit along a ray, as (distance, class).
fn cast(spec: &SceneSpec, o: &Vector3<f64>, d: &Vector3<f64>) -> Option<(f64, u32)> {
    let mut best: Option<(f64, u32)> = None;
    for prim in &spec.primitives {
        let hit = match prim {
            Primitive::Box { min, max, class } => ray_box(o, d, min, max).map(|t| (t, *class)),
            Primitive::Cylinder { x, y, radius, z_min, z_max, class } => {
                ray_cylinder(o, d, *x, *y, *radius, *z_min, *z_max).map(|t| (t, *class))
            }
        };
        if let Some((t, class)) = hit {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, class));
            }
        }
    }
    best
}

// Deterministic per-class reflectance so intensities are reproducible.
fn class_intensity(class: u32) -> f64 {
    0.2 + 0.6 * f64::from(class % 5) / 4.0
}

/// Ray-cast one return per (beam, azimuth step) and render the matching RGB
/// image with flat per-class colors. Misses produce no point; the calibration
/// is assembled from the rig's own camera.
pub fn generate_synthetic_scene(spec: &SceneSpec, rig: &RigSpec) -> Result<LabeledScene> {
    rig.validate()?;
    let cfg = rig.grid_config()?;
    let origin = Vector3::zeros();

    let mut points = Vec::new();
    let mut beams = Vec::new();
    let mut classes = Vec::new();
    for (beam, &elev) in rig.beam_elevations.iter().enumerate() {
        let (sin_e, cos_e) = elev.sin_cos();
        for step in 0..rig.azimuth_steps {
            let az = cfg.column_center(step);
            let dir = Vector3::new(cos_e * az.cos(), cos_e * az.sin(), sin_e);
            if let Some((t, class)) = cast(spec, &origin, &dir) {
                let p = dir * t;
                points.push(LidarPoint::new(p.x, p.y, p.z, class_intensity(class)));
                beams.push(beam as u32);
                classes.push(class);
            }
        }
    }

    let mut rgb = RgbImage::new(rig.camera.width, rig.camera.height);
    for v in 0..rig.camera.height {
        for u in 0..rig.camera.width {
            let (o, d) = rig.camera.pixel_ray(u as f64, v as f64);
            let class = cast(spec, &o, &d).map_or(0, |(_, c)| c);
            let c = class_color(class);
            rgb.set(u, v, [
                f32::from(c[0]) / 255.0,
                f32::from(c[1]) / 255.0,
                f32::from(c[2]) / 255.0,
            ]);
        }
    }

    let cloud = PointCloud::with_beam_ids(points, beams)?;
    LabeledScene::new(cloud, classes, rgb, rig.camera.calibration()?)
}

/// Class id per RGB pixel, from the same ray-cast that rendered the image.
/// This is the exact segmentation mask of the synthetic scene.
pub fn render_class_mask(spec: &SceneSpec, rig: &RigSpec) -> Result<ClassGrid> {
    rig.validate()?;
    let mut mask = ClassGrid::filled(rig.camera.width, rig.camera.height, 0);
    for v in 0..rig.camera.height {
        for u in 0..rig.camera.width {
            let (o, d) = rig.camera.pixel_ray(u as f64, v as f64);
            if let Some((_, class)) = cast(spec, &o, &d) {
                mask.set(u, v, class);
            }
        }
    }
    Ok(mask)
}

/// A square rig whose range image and RGB image coincide pixel for pixel:
/// the point stored at range pixel (col, row) projects to exactly
/// (u, v) = (col, row).
///
/// All quantities are dyadic rationals, so the projection identity is exact
/// in floating point. A wall of points at forward distance `depth` is placed
/// along the camera's own pixel rays; the mirrored focal length makes the
/// RGB column order match the azimuth order. The constructor verifies that
/// every generated azimuth falls into its own grid column and rejects focal
/// lengths that are too short for the requested size.
pub fn coincident_rig(size: usize, focal: f64, depth: f64) -> Result<(LabeledScene, GridConfig)> {
    if size < 2 {
        return Err(Error::Parameter("coincident rig needs size >= 2".into()));
    }
    if !(focal > 0.0) || !(depth > 0.0) {
        return Err(Error::Parameter("focal and depth must be positive".into()));
    }
    let w = size;
    let h = size;
    let c_half = (w as f64 - 1.0) / 2.0;

    let azimuth_span = w as f64 / focal;
    let cfg = GridConfig::new(w, h, -azimuth_span / 2.0, azimuth_span / 2.0)?;

    let mut points = Vec::with_capacity(w * h);
    let mut beams = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let x = depth;
            let y = depth * (col as f64 - c_half) / focal;
            let z = depth * (c_half - row as f64) / focal;
            points.push(LidarPoint::new(x, y, z, 0.25 + 0.5 * ((row + col) % 2) as f64));
            beams.push(row as u32);

            let az = crate::range_image::azimuth_of(x, y)?;
            let bin = ((az - cfg.azimuth_min) / cfg.azimuth_step()).floor() as usize;
            if az < cfg.azimuth_min || az >= cfg.azimuth_max || bin != col {
                return Err(Error::Parameter(format!(
                    "focal {focal} too short for size {size}: column {col} binned to {bin}"
                )));
            }
        }
    }

    // Mirrored horizontal focal length: u grows with azimuth, matching the
    // column order of the range image.
    let p2 = Matrix3x4::from_row_slice(&[
        -focal, 0.0, c_half, 0.0, //
        0.0, focal, c_half, 0.0, //
        0.0, 0.0, 1.0, 0.0,
    ]);
    let tr = Matrix3x4::from_row_slice(&[
        0.0, -1.0, 0.0, 0.0, //
        0.0, 0.0, -1.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    ]);
    let calib = CalibrationSet::new(p2, Matrix3::identity(), tr)?;

    let mut rgb = RgbImage::new(w, h);
    for v in 0..h {
        for u in 0..w {
            rgb.set(u, v, [
                (u as f32 + 1.0) / (w as f32 + 1.0),
                (v as f32 + 1.0) / (h as f32 + 1.0),
                0.3 + 0.4 * ((u + v) % 2) as f32,
            ]);
        }
    }

    let cloud = PointCloud::with_beam_ids(points, beams)?;
    let classes = vec![1u32; cloud.len()];
    let scene = LabeledScene::new(cloud, classes, rgb, calib)?;
    Ok((scene, cfg))
}

/// Scanner rig for [`demo_scene`], parameterized by resolution. The camera
/// sits at the LiDAR origin (no baseline) so the demo stays free of parallax
/// artifacts at object edges.
pub fn demo_rig(azimuth_steps: usize, beams: usize) -> RigSpec {
    let beam_elevations = (0..beams)
        .map(|b| -0.05 + 0.1 * (b as f64 + 0.5) / beams as f64)
        .collect();
    RigSpec {
        beam_elevations,
        azimuth_steps,
        azimuth_min: -0.4,
        azimuth_max: 0.4,
        camera: CameraRig::forward(1024, 256, 600.0, Vector3::zeros()),
    }
}

/// A small three-object scene whose silhouettes sit exactly on the azimuth
/// bin boundaries of the default 64-column demo rig. Together with the
/// zero-baseline camera this keeps every sampled ray well clear of object
/// edges, so nearest-pixel lookups agree with the generator everywhere.
pub fn demo_scene() -> (SceneSpec, RigSpec) {
    // Thin walls at constant x: the visible silhouette is just the azimuth
    // extent of the front face.
    let wall = |x: f64, az_lo: f64, az_hi: f64, class: u32| Primitive::Box {
        min: [x, x * az_lo.tan(), -3.0],
        max: [x + 1e-3, x * az_hi.tan(), 3.0],
        class,
    };
    // Cylinder whose tangent rays sit at azimuths -0.0625 and 0.
    let center_az: f64 = -0.03125;
    let dist = 8.0;
    let cyl = Primitive::Cylinder {
        x: dist * center_az.cos(),
        y: dist * center_az.sin(),
        radius: dist * (0.03125f64).sin(),
        z_min: -3.0,
        z_max: 3.0,
        class: 3,
    };
    let spec = SceneSpec {
        primitives: vec![wall(6.0, 0.05, 0.35, 1), wall(9.0, -0.35, -0.1, 2), cyl],
    };
    (spec, demo_rig(64, 8))
}

/// Parse a scene description, one primitive per line:
///
/// ```text
/// box <min_x> <min_y> <min_z> <max_x> <max_y> <max_z> <class>
/// cylinder <x> <y> <radius> <z_min> <z_max> <class>
/// ```
///
/// Blank lines and `#` comments are skipped.
pub fn parse_scene(text: &str, name: &str) -> Result<SceneSpec> {
    let err = |line: usize, detail: String| Error::Format {
        path: name.to_string(),
        detail: format!("line {}: {detail}", line + 1),
    };
    let mut primitives = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| err(lineno, format!("cannot parse number {s:?}")))
        };
        let parse_class = |s: &str| -> Result<u32> {
            s.parse().map_err(|_| err(lineno, format!("cannot parse class id {s:?}")))
        };
        match tokens[0] {
            "box" => {
                if tokens.len() != 8 {
                    return Err(err(lineno, format!("box needs 7 arguments, got {}", tokens.len() - 1)));
                }
                primitives.push(Primitive::Box {
                    min: [parse_f(tokens[1])?, parse_f(tokens[2])?, parse_f(tokens[3])?],
                    max: [parse_f(tokens[4])?, parse_f(tokens[5])?, parse_f(tokens[6])?],
                    class: parse_class(tokens[7])?,
                });
            }
            "cylinder" => {
                if tokens.len() != 7 {
                    return Err(err(
                        lineno,
                        format!("cylinder needs 6 arguments, got {}", tokens.len() - 1),
                    ));
                }
                primitives.push(Primitive::Cylinder {
                    x: parse_f(tokens[1])?,
                    y: parse_f(tokens[2])?,
                    radius: parse_f(tokens[3])?,
                    z_min: parse_f(tokens[4])?,
                    z_max: parse_f(tokens[5])?,
                    class: parse_class(tokens[6])?,
                });
            }
            other => return Err(err(lineno, format!("unknown primitive {other:?}"))),
        }
    }
    Ok(SceneSpec { primitives })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{project_point, EPS_DEPTH};

    fn demo_rig(beams: usize, steps: usize) -> RigSpec {
        let beam_elevations = (0..beams)
            .map(|b| -0.05 + 0.1 * (b as f64 + 0.5) / beams as f64)
            .collect();
        RigSpec {
            beam_elevations,
            azimuth_steps: steps,
            azimuth_min: -0.5,
            azimuth_max: 0.5,
            camera: CameraRig::forward(96, 64, 80.0, Vector3::new(0.0, -0.06, -0.04)),
        }
    }

    fn one_box() -> SceneSpec {
        SceneSpec {
            primitives: vec![Primitive::Box {
                min: [5.0, -3.0, -2.0],
                max: [7.0, 3.0, 2.0],
                class: 1,
            }],
        }
    }

    // Test-local slab intersection used as an oracle for the generator.
    fn brute_force_box_hit(d: &Vector3<f64>, min: &[f64; 3], max: &[f64; 3]) -> Option<f64> {
        let mut best: Option<f64> = None;
        // March along the ray and bisect the first inside/outside transition.
        let inside = |t: f64| {
            let p = d * t;
            (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a])
        };
        let mut t = 0.0;
        while t < 100.0 {
            if inside(t) {
                let mut lo = (t - 1e-3).max(0.0);
                let mut hi = t;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                best = Some(hi);
                break;
            }
            t += 1e-3;
        }
        best
    }

    #[test]
    fn box_scene_labels_every_return_with_the_box_class() {
        let rig = demo_rig(4, 8);
        let scene = generate_synthetic_scene(&one_box(), &rig).unwrap();
        assert!(scene.cloud.len() <= 32);
        assert!(!scene.cloud.is_empty());
        assert!(scene.per_point_class.iter().all(|&c| c == 1));

        // Cross-check each return against the bisection oracle.
        let cfg = rig.grid_config().unwrap();
        let mut n_oracle_hits = 0;
        for (beam, &elev) in rig.beam_elevations.iter().enumerate() {
            for step in 0..rig.azimuth_steps {
                let az = cfg.column_center(step);
                let d = Vector3::new(elev.cos() * az.cos(), elev.cos() * az.sin(), elev.sin());
                if let Some(t) = brute_force_box_hit(&d, &[5.0, -3.0, -2.0], &[7.0, 3.0, 2.0]) {
                    n_oracle_hits += 1;
                    let idx = scene
                        .cloud
                        .points()
                        .iter()
                        .position(|p| {
                            (p.x - t * d.x).abs() < 1e-4
                                && (p.y - t * d.y).abs() < 1e-4
                                && (p.z - t * d.z).abs() < 1e-4
                        });
                    assert!(idx.is_some(), "missing return for beam {beam} step {step}");
                }
            }
        }
        assert_eq!(n_oracle_hits, scene.cloud.len());
    }

    #[test]
    fn empty_scene_gives_no_points_and_background_rgb() {
        let rig = demo_rig(2, 4);
        let scene = generate_synthetic_scene(&SceneSpec::default(), &rig).unwrap();
        assert_eq!(scene.cloud.len(), 0);
        let bg = class_color(0);
        for v in 0..scene.rgb.height() {
            for u in 0..scene.rgb.width() {
                let px = scene.rgb.get(u, v);
                assert_eq!(px[0], f32::from(bg[0]) / 255.0);
            }
        }
    }

    #[test]
    fn box_occludes_cylinder_on_shared_rays() {
        let spec = SceneSpec {
            primitives: vec![
                Primitive::Box { min: [4.0, -2.0, -1.0], max: [6.0, 2.0, 1.0], class: 1 },
                Primitive::Cylinder { x: 10.0, y: 0.0, radius: 1.5, z_min: -1.0, z_max: 1.0, class: 2 },
            ],
        };
        let rig = demo_rig(3, 32);
        let scene = generate_synthetic_scene(&spec, &rig).unwrap();
        // The cylinder's angular extent is a strict subset of the box's, so
        // every shared ray must return the box class.
        assert!(scene.per_point_class.contains(&1));
        for (p, &class) in scene.cloud.points().iter().zip(&scene.per_point_class) {
            if class == 2 {
                // A cylinder return can only exist outside the box's angular
                // footprint: |azimuth| > atan(2/4).
                let az = crate::range_image::azimuth_of(p.x, p.y).unwrap();
                assert!(az.abs() > (2.0f64 / 4.0).atan() - 1e-9);
            }
        }
    }

    #[test]
    fn zero_beams_or_steps_rejected() {
        let mut rig = demo_rig(2, 4);
        rig.beam_elevations.clear();
        assert!(matches!(
            generate_synthetic_scene(&one_box(), &rig),
            Err(Error::Parameter(_))
        ));
        let mut rig = demo_rig(2, 4);
        rig.azimuth_steps = 0;
        assert!(matches!(
            generate_synthetic_scene(&one_box(), &rig),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn frustum_points_project_inside_the_image() {
        let rig = demo_rig(6, 48);
        let scene = generate_synthetic_scene(&one_box(), &rig).unwrap();
        let cam = &rig.camera;
        let mut checked = 0;
        for p in scene.cloud.points() {
            let pc = cam.rotation * Vector3::new(p.x, p.y, p.z) + cam.translation;
            if pc.z <= EPS_DEPTH {
                continue;
            }
            let u = cam.fx * pc.x / pc.z + cam.cx;
            let v = cam.fy * pc.y / pc.z + cam.cy;
            let inside = u >= 0.0
                && u <= (cam.width - 1) as f64
                && v >= 0.0
                && v <= (cam.height - 1) as f64;
            if !inside {
                continue;
            }
            let (pu, pv) =
                project_point(&scene.calib.composed_projection, p.x, p.y, p.z).unwrap();
            assert!((pu - u).abs() < 1e-6 && (pv - v).abs() < 1e-6);
            assert!(pu >= -1e-6 && pu <= (cam.width - 1) as f64 + 1e-6);
            assert!(pv >= -1e-6 && pv <= (cam.height - 1) as f64 + 1e-6);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn class_mask_matches_rgb_colors() {
        let rig = demo_rig(2, 4);
        let spec = one_box();
        let scene = generate_synthetic_scene(&spec, &rig).unwrap();
        let mask = render_class_mask(&spec, &rig).unwrap();
        for v in 0..mask.height() {
            for u in 0..mask.width() {
                let c = class_color(mask.get(u, v));
                let px = scene.rgb.get(u, v);
                assert_eq!(px[0], f32::from(c[0]) / 255.0);
                assert_eq!(px[1], f32::from(c[1]) / 255.0);
                assert_eq!(px[2], f32::from(c[2]) / 255.0);
            }
        }
    }

    #[test]
    fn coincident_rig_projects_pixels_onto_themselves() {
        let (scene, cfg) = coincident_rig(32, 256.0, 16.0).unwrap();
        assert_eq!(scene.cloud.len(), 32 * 32);
        let beams = scene.cloud.beam_ids().unwrap();
        for (i, p) in scene.cloud.points().iter().enumerate() {
            let (u, v) = project_point(&scene.calib.composed_projection, p.x, p.y, p.z).unwrap();
            let col = (i % 32) as f64;
            let row = (i / 32) as f64;
            assert_eq!(u, col, "point {i}");
            assert_eq!(v, row, "point {i}");
            assert_eq!(beams[i] as usize, i / 32);
        }
        assert_eq!(cfg.width, 32);
        assert_eq!(cfg.height, 32);
    }

    #[test]
    fn coincident_rig_rejects_short_focal() {
        // Strong tan/angle divergence at the edges: bins no longer line up.
        assert!(coincident_rig(64, 40.0, 16.0).is_err());
    }

    #[test]
    fn scene_text_round_trip() {
        let text = "# demo\nbox 4 -2 -1 6 2 1 1\n\ncylinder 10 0 1.5 -1 1 2  # tree\n";
        let spec = parse_scene(text, "demo.scene").unwrap();
        assert_eq!(spec.primitives.len(), 2);
        assert_eq!(
            spec.primitives[0],
            Primitive::Box { min: [4.0, -2.0, -1.0], max: [6.0, 2.0, 1.0], class: 1 }
        );
        assert!(parse_scene("sphere 1 2 3", "bad.scene").is_err());
        assert!(parse_scene("box 1 2 3", "bad.scene").is_err());
    }
}
