//! The conformal functionals S and R, their gradients, and their Hessians.
//!
//! On radii, with S_i the solid angles of the conformal simplex,
//!
//!   S(r) = sum_i r_i S_i                 (Euclidean)
//!   S(r) = 2 vol + sum_i r_i S_i         (hyperbolic)
//!
//! On lengths, with alpha_ij the dihedral angles,
//!
//!   R(l) = sum_ij l_ij alpha_ij          (Euclidean)
//!   R(l) = sum_ij l_ij alpha_ij + 2 vol  (hyperbolic)
//!
//! With these normalizations the Schläfli identity makes the gradients
//! exactly the angle data: dR/dl_ij = alpha_ij and dS/dr_i = S_i, in both
//! geometries. The supplementary-angle variant sum l_ij (pi - alpha_ij)
//! (+ 2 vol) is kept as [`eval_r_supplement`] for reference; its Euclidean
//! gradient is pi - alpha_ij, not alpha_ij, so it is *not* the production
//! functional.
//!
//! Pulling R back along the linear map i(r) = (r_1+r_2, ..., r_3+r_4) gives
//!
//!   R(i(r)) = S(r) + pi * (r_1 + r_2 + r_3 + r_4),
//!
//! because sum_{i<j} (r_i + r_j) alpha_ij = sum_i r_i (S_i + pi). The linear
//! correction drops at second order, so H(S) = J^T H(R) J for the constant
//! Jacobian J of i.
//!
//! Hessians are central finite differences of the analytic gradients (the
//! angle maps), one differentiation away from exact data rather than two
//! from values, with one Richardson step (columns at h and h/2) at
//! h = 1e-5 times the geometric mean of the input, clamped per coordinate
//! to keep perturbed inputs positive. Plain central differences at that
//! step leave visible truncation asymmetry on near-flat simplices, and
//! shrinking the step instead amplifies the cosh-scale roundoff of large
//! hyperbolic simplices; the fourth-order stencil is accurate on both ends.

use std::f64::consts::PI;

use nalgebra::Matrix6x4;

use crate::error::GeometryError;
use crate::euclidean;
use crate::hyperbolic;
use crate::pairs::EDGE_PAIRS;
use crate::types::{
    DihedralAngles, EdgeLengths, Geometry, Radii, SolidAngles, SymMatrix4, SymMatrix6,
};

/// Relative asymmetry above which a finite-difference Hessian is rejected.
pub const ASYMMETRY_TOL: f64 = 1e-6;

/// The conformal length map i(r) = (r1+r2, r1+r3, r1+r4, r2+r3, r2+r4, r3+r4).
pub fn map_i(radii: &Radii) -> EdgeLengths {
    let r = radii.as_array();
    let mut l = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        l[e] = r[i] + r[j];
    }
    EdgeLengths::new(l).expect("sums of positive radii are positive")
}

/// Constant Jacobian of [`map_i`]: the 6x4 vertex-edge incidence matrix.
pub fn jacobian_i() -> Matrix6x4<f64> {
    Matrix6x4::from_fn(|e, v| {
        let (i, j) = EDGE_PAIRS[e];
        if i == v || j == v { 1.0 } else { 0.0 }
    })
}

/// Dihedral angles of the simplex with the given lengths, per geometry.
pub fn dihedral_angles(
    lengths: &EdgeLengths,
    geometry: Geometry,
) -> Result<DihedralAngles, GeometryError> {
    match geometry {
        Geometry::Euclidean => euclidean::dihedral_angles_euclidean(lengths),
        Geometry::Hyperbolic => hyperbolic::dihedral_angles_hyperbolic(lengths),
    }
}

/// Solid angles of the simplex with the given lengths, per geometry.
pub fn solid_angles_for(
    lengths: &EdgeLengths,
    geometry: Geometry,
) -> Result<SolidAngles, GeometryError> {
    Ok(euclidean::solid_angles(&dihedral_angles(lengths, geometry)?))
}

fn two_vol(lengths: &EdgeLengths, geometry: Geometry) -> Result<f64, GeometryError> {
    match geometry {
        Geometry::Euclidean => Ok(0.0),
        Geometry::Hyperbolic => Ok(2.0 * hyperbolic::volume_hyperbolic(lengths)?.value),
    }
}

/// S(r) = sum_i r_i S_i, plus 2 vol in the hyperbolic case.
pub fn eval_s(radii: &Radii, geometry: Geometry) -> Result<f64, GeometryError> {
    let lengths = map_i(radii);
    let s = solid_angles_for(&lengths, geometry)?;
    let r = radii.as_array();
    let sum: f64 = (0..4).map(|i| r[i] * s.get(i)).sum();
    Ok(sum + two_vol(&lengths, geometry)?)
}

/// R(l) = sum_ij l_ij alpha_ij, plus 2 vol in the hyperbolic case.
pub fn eval_r(lengths: &EdgeLengths, geometry: Geometry) -> Result<f64, GeometryError> {
    let a = dihedral_angles(lengths, geometry)?;
    let sum: f64 = (0..6).map(|e| lengths.get(e) * a.get(e)).sum();
    Ok(sum + two_vol(lengths, geometry)?)
}

/// Supplementary-angle variant sum_ij l_ij (pi - alpha_ij) (+ 2 vol).
/// Kept for reference only; see the module docs.
pub fn eval_r_supplement(lengths: &EdgeLengths, geometry: Geometry) -> Result<f64, GeometryError> {
    let a = dihedral_angles(lengths, geometry)?;
    let sum: f64 = (0..6).map(|e| lengths.get(e) * (PI - a.get(e))).sum();
    Ok(sum + two_vol(lengths, geometry)?)
}

/// Gradient of S: exactly the solid angles, by the pulled-back Schläfli
/// identity. Central differences of [`eval_s`] reproduce it to 1e-6.
pub fn grad_s(radii: &Radii, geometry: Geometry) -> Result<SolidAngles, GeometryError> {
    solid_angles_for(&map_i(radii), geometry)
}

/// Gradient of R: exactly the dihedral angles, by the Schläfli identity.
pub fn grad_r(lengths: &EdgeLengths, geometry: Geometry) -> Result<DihedralAngles, GeometryError> {
    dihedral_angles(lengths, geometry)
}

/// Central finite-difference step: 1e-5 times the geometric mean of the input.
pub fn fd_step(values: &[f64]) -> f64 {
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    1e-5 * log_mean.exp()
}

fn central_columns<const N: usize>(
    values: [f64; N],
    mut gradient: impl FnMut(&[f64; N]) -> Result<[f64; N], GeometryError>,
) -> Result<[[f64; N]; N], GeometryError> {
    let h_base = fd_step(&values);
    let mut raw = [[0.0; N]; N];
    for j in 0..N {
        // clamp so perturbed coordinates stay positive
        let h = h_base.min(0.5 * values[j]);
        let mut column = |h: f64| -> Result<[f64; N], GeometryError> {
            let mut plus = values;
            plus[j] += h;
            let mut minus = values;
            minus[j] -= h;
            let gp = gradient(&plus)?;
            let gm = gradient(&minus)?;
            Ok(std::array::from_fn(|i| (gp[i] - gm[i]) / (2.0 * h)))
        };
        let coarse = column(h)?;
        let fine = column(h / 2.0)?;
        for i in 0..N {
            raw[i][j] = (4.0 * fine[i] - coarse[i]) / 3.0;
        }
    }
    Ok(raw)
}

fn check_asymmetry<const N: usize>(
    m: crate::types::SymMatrix<N>,
) -> Result<crate::types::SymMatrix<N>, GeometryError> {
    if m.asymmetry() > ASYMMETRY_TOL {
        return Err(GeometryError::NumericalInstability {
            asymmetry: m.asymmetry(),
            tol: ASYMMETRY_TOL,
        });
    }
    Ok(m)
}

/// Hessian of S: H_ij = dS_i/dr_j by central differences of the solid-angle
/// gradient, symmetrized with the asymmetry recorded.
pub fn hessian_s(radii: &Radii, geometry: Geometry) -> Result<SymMatrix4, GeometryError> {
    let raw = central_columns(radii.as_array(), |r| {
        let radii = Radii::new(*r).expect("perturbed radii stay positive");
        Ok(grad_s(&radii, geometry)?.as_array())
    })?;
    check_asymmetry(SymMatrix4::from_raw(raw))
}

/// Hessian of R: entries dalpha_ij/dl_kl by central differences of the
/// dihedral-angle map, symmetrized with the asymmetry recorded.
pub fn hessian_r(lengths: &EdgeLengths, geometry: Geometry) -> Result<SymMatrix6, GeometryError> {
    let raw = central_columns(lengths.as_array(), |l| {
        let lengths = EdgeLengths::new(*l).expect("perturbed lengths stay positive");
        Ok(dihedral_angles(&lengths, geometry)?.as_array())
    })?;
    check_asymmetry(SymMatrix6::from_raw(raw))
}
