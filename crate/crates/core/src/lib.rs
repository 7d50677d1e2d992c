//! Dense LiDAR range images and calibration-driven warping of feature grids
//! between the RGB image domain and the range-image domain.
//!
//! The crate covers the geometric side of camera/LiDAR fusion:
//!
//! - loading KITTI-style point clouds, calibrations and labels
//!   ([`io`], [`cloud`], [`calib`]),
//! - discretizing sweeps into the native range representation
//!   ([`range_image`]),
//! - projecting range pixels into the RGB image to form correspondences
//!   ([`projection`]),
//! - fitting a first-order polyharmonic spline through subsampled
//!   correspondences and warping multi-channel feature grids across domains
//!   ([`spline`], [`sampling`], [`fusion`]),
//! - evaluating segmentations and benchmarking the control-point budget
//!   ([`eval`], [`bench`]),
//! - synthetic ray-cast scenes that make all of the above testable against
//!   exact ground truth ([`synthetic`]).

// `!(x > 0.0)` is used deliberately for parameter guards: unlike `x <= 0.0`
// it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod calib;
pub mod cloud;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod projection;
pub mod range_image;
pub mod render;
pub mod sampling;
pub mod scene;
pub mod spline;
pub mod synthetic;

pub use calib::CalibrationSet;
pub use cloud::{LidarPoint, PointCloud};
pub use error::{Error, Result};
pub use eval::{ClassRemap, ConfusionMatrix, IoUReport};
pub use fusion::{FeatureExtractor, FusionPlan, PipelineResult};
pub use projection::{Correspondence, CorrespondenceSet};
pub use range_image::{GridConfig, RangeImage, RowMode};
pub use sampling::{FeatureGrid, SeedPolicy};
pub use scene::{ClassGrid, LabeledScene, RgbImage, NO_CLASS};
pub use spline::SplineWarp;
