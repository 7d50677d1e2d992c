//! First-order polyharmonic spline mapping range-image pixel coordinates to
//! RGB pixel coordinates.
//!
//! The interpolant is
//!
//! ```text
//! f(x) = sum_i w_i * |x - c_i| + V^T [1; x]
//! ```
//!
//! with one weight column per output coordinate. Fitting solves the augmented
//! symmetric system
//!
//! ```text
//! [ K + lambda*I   Q ] [w]   [t]
//! [ Q^T            0 ] [v] = [0]
//! ```
//!
//! where `K_ij = |c_i - c_j|`, `Q` holds rows `[1, c_x, c_y]` and the zero
//! block enforces the orthogonality side conditions `sum w_i = 0` and
//! `sum w_i c_i = 0`. With `lambda = 0` the spline interpolates its control
//! points exactly and reproduces any affine map with vanishing kernel weights.
//!
//! The system is dense and small (a few hundred controls at most), so a dense
//! LU factorization is used. A fitted warp is immutable; the same weights are
//! evaluated for every feature layer of a sample.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::projection::CorrespondenceSet;

const POLY_TERMS: usize = 3;
const COLLINEARITY_TOL: f64 = 1e-10;

/// A fitted warp: control points, kernel weights and the affine tail.
#[derive(Clone, Debug)]
pub struct SplineWarp {
    controls: Vec<[f64; 2]>,
    weights: Vec<[f64; 2]>,
    /// Rows: constant, x, y; columns: output u, output v.
    affine: [[f64; 2]; 3],
    fit_residual: f64,
}

impl SplineWarp {
    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn controls(&self) -> &[[f64; 2]] {
        &self.controls
    }

    pub fn weights(&self) -> &[[f64; 2]] {
        &self.weights
    }

    pub fn affine(&self) -> &[[f64; 2]; 3] {
        &self.affine
    }

    /// Largest interpolation error over the control points, in pixels
    /// (infinity norm per point).
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Evaluate the warp at one query position.
    pub fn eval_one(&self, x: f64, y: f64) -> [f64; 2] {
        let mut u = self.affine[0][0] + self.affine[1][0] * x + self.affine[2][0] * y;
        let mut v = self.affine[0][1] + self.affine[1][1] * x + self.affine[2][1] * y;
        for (c, w) in self.controls.iter().zip(&self.weights) {
            let dx = x - c[0];
            let dy = y - c[1];
            let r = (dx * dx + dy * dy).sqrt();
            u += w[0] * r;
            v += w[1] * r;
        }
        [u, v]
    }
}

/// Fit the spline through a correspondence set (range coordinates as control
/// points, RGB coordinates as targets).
pub fn fit_spline(controls: &CorrespondenceSet, lambda: f64) -> Result<SplineWarp> {
    fit_spline_points(&controls.range_coords(), &controls.rgb_coords(), lambda)
}

/// Fit the spline through explicit control/target pairs.
pub fn fit_spline_points(
    controls: &[[f64; 2]],
    targets: &[[f64; 2]],
    lambda: f64,
) -> Result<SplineWarp> {
    let n = controls.len();
    if n < POLY_TERMS {
        return Err(Error::InsufficientControls(n));
    }
    if targets.len() != n {
        return Err(Error::ShapeMismatch {
            left: format!("{n} controls"),
            right: format!("{} targets", targets.len()),
        });
    }
    if !(lambda >= 0.0) {
        return Err(Error::Parameter(format!("lambda must be non-negative, got {lambda}")));
    }

    // Polynomial block rank test: collinear controls make it singular.
    let poly = DMatrix::from_fn(n, POLY_TERMS, |i, j| match j {
        0 => 1.0,
        1 => controls[i][0],
        _ => controls[i][1],
    });
    let sv = poly.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= COLLINEARITY_TOL * smax {
        return Err(Error::DegenerateGeometry(format!(
            "control points are collinear (polynomial block rank deficient, \
             singular values {smax:.3e}..{smin:.3e})"
        )));
    }

    let dim = n + POLY_TERMS;
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let dx = controls[i][0] - controls[j][0];
            let dy = controls[i][1] - controls[j][1];
            a[(i, j)] = (dx * dx + dy * dy).sqrt();
        }
        a[(i, i)] += lambda;
        for t in 0..POLY_TERMS {
            a[(i, n + t)] = poly[(i, t)];
            a[(n + t, i)] = poly[(i, t)];
        }
    }

    let lu = a.clone().lu();
    let mut solution = [DVector::zeros(dim), DVector::zeros(dim)];
    for (out, col) in solution.iter_mut().enumerate() {
        let mut rhs = DVector::zeros(dim);
        for i in 0..n {
            rhs[i] = targets[i][out];
        }
        *col = lu.solve(&rhs).ok_or_else(|| Error::Numerical {
            condition: condition_estimate(&a),
        })?;
    }

    let weights: Vec<[f64; 2]> = (0..n).map(|i| [solution[0][i], solution[1][i]]).collect();
    let affine = [
        [solution[0][n], solution[1][n]],
        [solution[0][n + 1], solution[1][n + 1]],
        [solution[0][n + 2], solution[1][n + 2]],
    ];

    let mut warp = SplineWarp {
        controls: controls.to_vec(),
        weights,
        affine,
        fit_residual: 0.0,
    };
    warp.fit_residual = controls
        .iter()
        .zip(targets)
        .map(|(c, t)| {
            let f = warp.eval_one(c[0], c[1]);
            (f[0] - t[0]).abs().max((f[1] - t[1]).abs())
        })
        .fold(0.0, f64::max);
    Ok(warp)
}

/// Evaluate the warp at a batch of query positions.
pub fn eval_spline(warp: &SplineWarp, queries: &[[f64; 2]]) -> Vec<[f64; 2]> {
    queries.iter().map(|q| warp.eval_one(q[0], q[1])).collect()
}

fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}
