//! Euclidean tetrahedron geometry from edge lengths.
//!
//! Realizability is decided by the Cayley-Menger determinant of the squared
//! lengths, normalized so that
//!
//!   det = 288 * vol^2
//!
//! for a nondegenerate tetrahedron. Angles come from one code path: an
//! explicit coordinate embedding followed by tangent-plane projection at
//! each edge. An independent Gram-matrix recomputation of the same angles
//! lives in the test suite only.

use std::f64::consts::PI;

use nalgebra::{Matrix5, Vector3};

use crate::error::GeometryError;
use crate::pairs::{EDGE_PAIRS, opposite_edge};
use crate::types::{DihedralAngles, EdgeLengths, SolidAngles};

/// Cayley-Menger determinant of the squared lengths; positive exactly when
/// the lengths embed as a nondegenerate tetrahedron, and then equal to
/// 288 * vol^2. Total function: no realizability precondition.
pub fn cayley_menger_det(lengths: &EdgeLengths) -> f64 {
    let d = lengths.squared();
    #[rustfmt::skip]
    let m = Matrix5::new(
        0.0, 1.0,  1.0,  1.0,  1.0,
        1.0, 0.0,  d[0], d[1], d[2],
        1.0, d[0], 0.0,  d[3], d[4],
        1.0, d[1], d[3], 0.0,  d[5],
        1.0, d[2], d[4], d[5], 0.0,
    );
    m.determinant()
}

/// Scale-aware degeneracy gate: a simplex counts as degenerate when the
/// Cayley-Menger determinant is at or below 1e-12 * (mean length)^8.
pub fn degeneracy_tolerance(lengths: &EdgeLengths) -> f64 {
    let mean = lengths.sum() / 6.0;
    1e-12 * mean.powi(8)
}

fn require_nondegenerate(lengths: &EdgeLengths) -> Result<f64, GeometryError> {
    let det = cayley_menger_det(lengths);
    let tol = degeneracy_tolerance(lengths);
    if det <= tol {
        return Err(GeometryError::DegenerateSimplex { det, tol });
    }
    Ok(det)
}

/// Volume in length-units cubed: sqrt(det / 288).
pub fn volume_euclidean(lengths: &EdgeLengths) -> Result<f64, GeometryError> {
    let det = require_nondegenerate(lengths)?;
    Ok((det / 288.0).sqrt())
}

/// Embed the tetrahedron in canonical position: vertex 1 at the origin,
/// vertex 2 on the positive x-axis, vertex 3 in the open upper half of the
/// xy-plane, vertex 4 with positive z.
pub fn embed_euclidean(lengths: &EdgeLengths) -> Result<[Vector3<f64>; 4], GeometryError> {
    let det = require_nondegenerate(lengths)?;
    let degenerate = || GeometryError::DegenerateSimplex {
        det,
        tol: degeneracy_tolerance(lengths),
    };

    let [l12, l13, l14, l23, l24, l34] = lengths.as_array();
    let (s12, s13, s14) = (l12 * l12, l13 * l13, l14 * l14);
    let (s23, s24, s34) = (l23 * l23, l24 * l24, l34 * l34);

    let x2 = l12;
    let x3 = (s12 + s13 - s23) / (2.0 * l12);
    let y3_sq = s13 - x3 * x3;
    if y3_sq <= 0.0 {
        return Err(degenerate());
    }
    let y3 = y3_sq.sqrt();

    let x4 = (s12 + s14 - s24) / (2.0 * l12);
    let y4 = (s13 + s14 - s34 - 2.0 * x3 * x4) / (2.0 * y3);
    let z4_sq = s14 - x4 * x4 - y4 * y4;
    if z4_sq <= 0.0 {
        return Err(degenerate());
    }
    let z4 = z4_sq.sqrt();

    Ok([
        Vector3::zeros(),
        Vector3::new(x2, 0.0, 0.0),
        Vector3::new(x3, y3, 0.0),
        Vector3::new(x4, y4, z4),
    ])
}

/// Angle in (0, pi) between two nonzero vectors, via the half-angle form
/// 2*atan2(|a_hat - b_hat|, |a_hat + b_hat|), which stays accurate near 0 and pi.
fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let a = a.normalize();
    let b = b.normalize();
    2.0 * (a - b).norm().atan2((a + b).norm())
}

/// Interior dihedral angles along the six edges, from the embedded simplex:
/// at edge (i, j), project the directions toward the two opposite vertices
/// onto the plane orthogonal to the edge and take the angle between them.
pub fn dihedral_angles_euclidean(lengths: &EdgeLengths) -> Result<DihedralAngles, GeometryError> {
    let points = embed_euclidean(lengths)?;
    let mut angles = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        let (k, l) = EDGE_PAIRS[opposite_edge(e)];
        let axis = (points[j] - points[i]).normalize();
        let to_k = points[k] - points[i];
        let to_l = points[l] - points[i];
        let wk = to_k - axis * to_k.dot(&axis);
        let wl = to_l - axis * to_l.dot(&axis);
        angles[e] = angle_between(&wk, &wl);
    }
    Ok(DihedralAngles::from_array(angles))
}

/// Solid angles from dihedral angles: S_i = -pi + sum of the three dihedral
/// angles at the edges meeting vertex i. Geometry-independent.
pub fn solid_angles(angles: &DihedralAngles) -> SolidAngles {
    let mut s = [0.0; 4];
    for (v, out) in s.iter_mut().enumerate() {
        *out = angles.sum_at_vertex(v) - PI;
    }
    SolidAngles::from_array(s)
}
