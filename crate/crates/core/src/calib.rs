//! Camera/LiDAR calibration: the 3x4 projection from LiDAR coordinates to
//! RGB pixels and the components it is composed from.

use nalgebra::{Matrix3, Matrix3x4, Matrix4};

use crate::error::{Error, Result};

/// Calibration of one camera against the LiDAR frame.
///
/// `composed_projection` maps homogeneous LiDAR coordinates to homogeneous
/// pixel coordinates and equals
/// `camera_intrinsics_projective * pad4(rectifying_rotation) * pad4(lidar_to_camera)`.
#[derive(Clone, Debug)]
pub struct CalibrationSet {
    pub camera_intrinsics_projective: Matrix3x4<f64>,
    pub rectifying_rotation: Matrix3<f64>,
    pub lidar_to_camera: Matrix3x4<f64>,
    pub composed_projection: Matrix3x4<f64>,
}

impl CalibrationSet {
    /// Compose the projection from its components. Rejects a `lidar_to_camera`
    /// whose rotation block is not orthonormal (tolerance 1e-6).
    pub fn new(
        camera_intrinsics_projective: Matrix3x4<f64>,
        rectifying_rotation: Matrix3<f64>,
        lidar_to_camera: Matrix3x4<f64>,
    ) -> Result<Self> {
        let rot = lidar_to_camera.fixed_view::<3, 3>(0, 0).into_owned();
        let deviation = (rot.transpose() * rot - Matrix3::identity()).abs().max();
        if deviation > 1e-6 {
            return Err(Error::Parameter(format!(
                "lidar_to_camera rotation block is not orthonormal (max deviation {deviation:.3e})"
            )));
        }
        let composed_projection = compose_projection(
            &camera_intrinsics_projective,
            &rectifying_rotation,
            &lidar_to_camera,
        );
        Ok(Self {
            camera_intrinsics_projective,
            rectifying_rotation,
            lidar_to_camera,
            composed_projection,
        })
    }
}

/// `P * pad4(R) * pad4(T)` where `pad4` embeds into 4x4 homogeneous form.
pub fn compose_projection(
    intrinsics: &Matrix3x4<f64>,
    rotation: &Matrix3<f64>,
    rigid: &Matrix3x4<f64>,
) -> Matrix3x4<f64> {
    intrinsics * pad4_rotation(rotation) * pad4_rigid(rigid)
}

fn pad4_rotation(r: &Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m
}

fn pad4_rigid(t: &Matrix3x4<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 4>(0, 0).copy_from(t);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Vector3};
    use rand::{Rng, SeedableRng};

    fn ident_3x4() -> Matrix3x4<f64> {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
        m
    }

    #[test]
    fn identity_composition() {
        let c = CalibrationSet::new(ident_3x4(), Matrix3::identity(), ident_3x4()).unwrap();
        assert_eq!(c.composed_projection, ident_3x4());
    }

    #[test]
    fn translation_passes_through() {
        let mut tr = ident_3x4();
        tr[(2, 3)] = 5.0;
        let c = CalibrationSet::new(ident_3x4(), Matrix3::identity(), tr).unwrap();
        assert_eq!(c.composed_projection, tr);
    }

    #[test]
    fn non_orthonormal_rotation_rejected() {
        let mut tr = ident_3x4();
        tr[(0, 0)] = 2.0;
        assert!(CalibrationSet::new(ident_3x4(), Matrix3::identity(), tr).is_err());
    }

    // Independent element-wise triple product, written without nalgebra's
    // operators so the composition path is cross-checked.
    fn compose_by_hand(p: &Matrix3x4<f64>, r: &Matrix3<f64>, t: &Matrix3x4<f64>) -> [[f64; 4]; 3] {
        let mut r4 = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                r4[i][j] = r[(i, j)];
            }
        }
        r4[3][3] = 1.0;
        let mut t4 = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..4 {
                t4[i][j] = t[(i, j)];
            }
        }
        t4[3][3] = 1.0;
        let mut rt = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    rt[i][j] += r4[i][k] * t4[k][j];
                }
            }
        }
        let mut out = [[0.0; 4]; 3];
        for i in 0..3 {
            for j in 0..4 {
                for k in 0..4 {
                    out[i][j] += p[(i, k)] * rt[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn composition_matches_hand_product_on_random_components() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut p = Matrix3x4::zeros();
            p[(0, 0)] = rng.random_range(100.0..1000.0);
            p[(1, 1)] = rng.random_range(100.0..1000.0);
            p[(0, 2)] = rng.random_range(-500.0..500.0);
            p[(1, 2)] = rng.random_range(-500.0..500.0);
            p[(2, 2)] = 1.0;
            p[(0, 3)] = rng.random_range(-100.0..100.0);

            let axis = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let r0 = Rotation3::from_scaled_axis(axis * 0.01).into_inner();

            let axis2 = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let rot = Rotation3::from_scaled_axis(axis2).into_inner();
            let mut tr = Matrix3x4::zeros();
            tr.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
            for i in 0..3 {
                tr[(i, 3)] = rng.random_range(-2.0..2.0);
            }

            let calib = CalibrationSet::new(p, r0, tr).unwrap();
            let oracle = compose_by_hand(&p, &r0, &tr);
            for i in 0..3 {
                for j in 0..4 {
                    let got = calib.composed_projection[(i, j)];
                    let want = oracle[i][j];
                    let scale = want.abs().max(1.0);
                    assert!(
                        (got - want).abs() <= 1e-10 * scale,
                        "entry ({i},{j}): {got} vs {want}"
                    );
                }
            }
        }
    }
}
