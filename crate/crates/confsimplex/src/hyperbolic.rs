//! Hyperbolic tetrahedron geometry from edge lengths.
//!
//! Points live on the upper sheet of the hyperboloid <v, v> = -1 in
//! Minkowski space with signature (-, +, +, +), time coordinate first, so
//! that <v_i, v_j> = -cosh d(v_i, v_j). The Gram matrix stored here records
//! G_ij = -<v_i, v_j> (diagonal 1, off-diagonal cosh l_ij); a length tuple
//! is realizable exactly when the stepwise hyperboloid embedding goes
//! through, which is the Lorentzian Cholesky of that matrix.
//!
//! Volume uses the scaling path l(t) = t * l. The derivative form
//!
//!   V = -(1/2) * integral_0^1  sum_e t l_e  d/dt alpha_e(t l)  dt
//!
//! integrates by parts (alpha is bounded, t alpha -> 0 at 0) to
//!
//!   V = (1/2) * integral_0^1  sum_e l_e (alpha_e(t l) - alpha_e(l))  dt,
//!
//! which needs no numerical differentiation and is the default integrand.
//! The finite-difference rate form is kept behind [`VolumeMethod`] as a
//! cross-check; both run on adaptive 15-point Gauss-Legendre panels.

use nalgebra::{Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GeometryError;
use crate::pairs::{EDGE_PAIRS, opposite_edge};
use crate::quad::{self, QuadError};
use crate::types::{DihedralAngles, EdgeLengths};

/// Minkowski inner product with signature (-, +, +, +), time first.
pub fn minkowski_dot(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Gram matrix of minus the Minkowski products of the vertex vectors:
/// G_ii = 1 and G_ij = cosh(l_ij).
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiGram {
    entries: [[f64; 4]; 4],
}

impl MinkowskiGram {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.entries[i][j])
    }

    pub fn det(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Counts of (positive, negative) eigenvalues; a realizable tetrahedron
    /// gives (1, 3) and hence a negative determinant.
    pub fn signature(&self) -> (usize, usize) {
        let ev = self.to_matrix().symmetric_eigen().eigenvalues;
        let pos = ev.iter().filter(|&&x| x > 0.0).count();
        let neg = ev.iter().filter(|&&x| x < 0.0).count();
        (pos, neg)
    }
}

/// Build the Gram matrix from edge lengths; exact up to cosh evaluation.
pub fn gram_from_lengths(lengths: &EdgeLengths) -> MinkowskiGram {
    let mut entries = [[1.0; 4]; 4];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        let c = lengths.get(e).cosh();
        entries[i][j] = c;
        entries[j][i] = c;
    }
    MinkowskiGram { entries }
}

/// Point on the upper hyperboloid sheet with the time coordinate stored as
/// its offset from 1, so that simplices far smaller than the curvature scale
/// do not lose their shape to cancellation against the leading 1
/// (cosh(t l) - 1 is of order t^2 l^2).
#[derive(Debug, Clone, Copy)]
struct SheetPoint {
    /// time coordinate minus one
    time_m1: f64,
    spatial: Vector3<f64>,
}

impl SheetPoint {
    fn to_vector4(self) -> Vector4<f64> {
        Vector4::new(
            1.0 + self.time_m1,
            self.spatial.x,
            self.spatial.y,
            self.spatial.z,
        )
    }
}

/// cosh(d(p, q)) - 1, evaluated without forming the near-1 product.
fn cosh_dist_m1(p: &SheetPoint, q: &SheetPoint) -> f64 {
    // -(<p, q>) - 1 with <,> the Minkowski form:
    // (1+a)(1+b) - x.y - 1 = a + b + a b - x.y
    p.time_m1 + q.time_m1 + p.time_m1 * q.time_m1 - p.spatial.dot(&q.spatial)
}

/// Stepwise hyperboloid embedding in the shifted representation; the
/// building blocks are u_ij = cosh(l_ij) - 1 = 2 sinh^2(l_ij / 2).
fn embed_sheet(lengths: &EdgeLengths) -> Result<[SheetPoint; 4], GeometryError> {
    let u = lengths.as_array().map(|l| {
        let s = (l / 2.0).sinh();
        2.0 * s * s
    });
    let [u12, u13, u14, u23, u24, u34] = u;

    // sinh(l12) = sqrt((cosh-1)(cosh+1))
    let s12 = (u12 * (2.0 + u12)).sqrt();

    // cosh l12 cosh l13 - cosh l23, with the 1s cancelled symbolically
    let x3 = (u12 + u13 + u12 * u13 - u23) / s12;
    let y3_sq = u13 * (2.0 + u13) - x3 * x3;
    if y3_sq <= 0.0 {
        return Err(GeometryError::NotRealizable {
            reason: "face (1,2,3) violates the hyperbolic triangle inequality",
        });
    }
    let y3 = y3_sq.sqrt();

    let x4 = (u12 + u14 + u12 * u14 - u24) / s12;
    let y4 = (u13 + u14 + u13 * u14 - u34 - x3 * x4) / y3;
    let z4_sq = u14 * (2.0 + u14) - x4 * x4 - y4 * y4;
    if z4_sq <= 0.0 {
        return Err(GeometryError::NotRealizable {
            reason: "vertex 4 does not lift off the plane of face (1,2,3)",
        });
    }
    let z4 = z4_sq.sqrt();

    Ok([
        SheetPoint {
            time_m1: 0.0,
            spatial: Vector3::zeros(),
        },
        SheetPoint {
            time_m1: u12,
            spatial: Vector3::new(s12, 0.0, 0.0),
        },
        SheetPoint {
            time_m1: u13,
            spatial: Vector3::new(x3, y3, 0.0),
        },
        SheetPoint {
            time_m1: u14,
            spatial: Vector3::new(x4, y4, z4),
        },
    ])
}

/// Embed the tetrahedron on the upper hyperboloid sheet in canonical
/// position: vertex 1 at (1,0,0,0), vertex 2 in the (t,x) plane with x > 0,
/// vertex 3 with y > 0 and z = 0, vertex 4 with z > 0.
///
/// Fails with `NotRealizable` exactly when the Gram matrix does not have
/// Lorentzian signature, i.e. when no such tetrahedron exists.
pub fn embed_hyperboloid(lengths: &EdgeLengths) -> Result<[Vector4<f64>; 4], GeometryError> {
    Ok(embed_sheet(lengths)?.map(SheetPoint::to_vector4))
}

/// Hyperbolic distance between two points on the upper sheet.
pub fn hyperbolic_distance(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    (-minkowski_dot(a, b)).max(1.0).acosh()
}

/// Unit tangent vector at `p` pointing along the geodesic toward `q`,
/// computed in the shifted representation: with c = cosh(d(p, q)),
/// (q - c p) / sinh(d) stays accurate because c - 1 never cancels.
fn unit_tangent(p: &SheetPoint, q: &SheetPoint) -> Vector4<f64> {
    let cm1 = cosh_dist_m1(p, q);
    let s = (cm1 * (2.0 + cm1)).sqrt();
    let time = q.time_m1 - p.time_m1 - cm1 * (1.0 + p.time_m1);
    let spatial = q.spatial - p.spatial - p.spatial * cm1;
    Vector4::new(time, spatial.x, spatial.y, spatial.z) / s
}

fn minkowski_norm(v: &Vector4<f64>) -> f64 {
    minkowski_dot(v, v).max(0.0).sqrt()
}

/// Angle in (0, pi) between two tangent vectors at the same base point,
/// where the restricted Minkowski form is positive definite.
fn tangent_angle(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    let a = a / minkowski_norm(a);
    let b = b / minkowski_norm(b);
    2.0 * minkowski_norm(&(a - b)).atan2(minkowski_norm(&(a + b)))
}

/// Interior dihedral angles along the six edges: at edge (i, j), project the
/// tangents toward the two opposite vertices onto the tangent plane
/// orthogonal to the edge direction and take the angle between them.
///
/// As all lengths shrink with fixed shape these converge to the Euclidean
/// angles of that shape.
pub fn dihedral_angles_hyperbolic(lengths: &EdgeLengths) -> Result<DihedralAngles, GeometryError> {
    let v = embed_sheet(lengths)?;
    let mut angles = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        let (k, l) = EDGE_PAIRS[opposite_edge(e)];
        let uj = unit_tangent(&v[i], &v[j]);
        let uk = unit_tangent(&v[i], &v[k]);
        let ul = unit_tangent(&v[i], &v[l]);
        let wk = uk - uj * minkowski_dot(&uk, &uj);
        let wl = ul - uj * minkowski_dot(&ul, &uj);
        angles[e] = tangent_angle(&wk, &wl);
    }
    Ok(DihedralAngles::from_array(angles))
}

/// Hyperbolic volume with an absolute-error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HyperbolicVolume {
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// Integrand used for the scaling-path volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMethod {
    /// Derivative-free form sum_e l_e (alpha_e(t l) - alpha_e(l)) / 2.
    AngleDifference,
    /// Literal rate form -(t/2) sum_e l_e dalpha_e/dt with central
    /// finite differences of step `fd_step_rel * t`.
    SchlafliRate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeOptions {
    /// Absolute tolerance for the adaptive quadrature.
    pub quad_tol: f64,
    /// Bisection depth cap before reporting `QuadratureFailure`.
    pub max_depth: u32,
    pub method: VolumeMethod,
    /// Relative step for the finite-difference rate integrand.
    pub fd_step_rel: f64,
    /// Richardson-extrapolate the finite-difference rate integrand.
    pub richardson: bool,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        VolumeOptions {
            quad_tol: 1e-13,
            max_depth: 40,
            method: VolumeMethod::AngleDifference,
            fd_step_rel: 1e-6,
            richardson: false,
        }
    }
}

/// Hyperbolic volume by integrating the Schläfli identity along the scaling
/// path l(t) = t * l from the cusp at t = 0. Requires realizability along the
/// whole path (automatic for conformal lengths). The error estimate is the
/// quadrature's own, refined below `opts.quad_tol` or else
/// `QuadratureFailure`.
pub fn volume_hyperbolic_with(
    lengths: &EdgeLengths,
    opts: &VolumeOptions,
) -> Result<HyperbolicVolume, GeometryError> {
    // surface realizability problems at t = 1 before integrating
    let angles_full = dihedral_angles_hyperbolic(lengths)?;
    let l = lengths.as_array();

    let angle_rate = |t: f64, step_rel: f64| -> Result<[f64; 6], GeometryError> {
        let h = step_rel * t;
        let plus = dihedral_angles_hyperbolic(&lengths.scaled(t + h))?.as_array();
        let minus = dihedral_angles_hyperbolic(&lengths.scaled(t - h))?.as_array();
        let mut rate = [0.0; 6];
        for e in 0..6 {
            rate[e] = (plus[e] - minus[e]) / (2.0 * h);
        }
        Ok(rate)
    };

    let mut integrand = |t: f64| -> Result<f64, GeometryError> {
        match opts.method {
            VolumeMethod::AngleDifference => {
                let angles_t = dihedral_angles_hyperbolic(&lengths.scaled(t))?.as_array();
                let full = angles_full.as_array();
                Ok(0.5
                    * (0..6)
                        .map(|e| l[e] * (angles_t[e] - full[e]))
                        .sum::<f64>())
            }
            VolumeMethod::SchlafliRate => {
                let mut rate = angle_rate(t, opts.fd_step_rel)?;
                if opts.richardson {
                    let coarse = rate;
                    let fine = angle_rate(t, opts.fd_step_rel / 2.0)?;
                    for e in 0..6 {
                        rate[e] = (4.0 * fine[e] - coarse[e]) / 3.0;
                    }
                }
                Ok(-0.5 * t * (0..6).map(|e| l[e] * rate[e]).sum::<f64>())
            }
        }
    };

    match quad::integrate(&mut integrand, 0.0, 1.0, opts.quad_tol, opts.max_depth) {
        Ok(q) => Ok(HyperbolicVolume {
            value: q.value,
            abs_error_estimate: q.error_estimate,
        }),
        Err(QuadError::Integrand(e)) => Err(e),
        Err(QuadError::Refinement {
            error_estimate,
            tol,
            depth,
        }) => Err(GeometryError::QuadratureFailure {
            error_estimate,
            tol,
            depth,
        }),
    }
}

/// [`volume_hyperbolic_with`] under default options.
pub fn volume_hyperbolic(lengths: &EdgeLengths) -> Result<HyperbolicVolume, GeometryError> {
    volume_hyperbolic_with(lengths, &VolumeOptions::default())
}

/// Domain gate for the scaling-path volume: t * lengths must stay realizable
/// for every t in (0, 1]. The Cayley-Menger sign controls the t -> 0 end and
/// is scale-invariant, so the Euclidean gate covers the whole approach to the
/// cusp; the hyperboloid embedding checks the t = 1 end. Lengths that embed
/// hyperbolically but fail the Euclidean gate (a fourth ball wedged into the
/// pocket of the other three) have a volume, but not one this path reaches —
/// [`volume_hyperbolic`] reports `NotRealizable` on them mid-integration.
pub fn scaling_path_realizable(lengths: &EdgeLengths) -> bool {
    crate::euclidean::cayley_menger_det(lengths) > crate::euclidean::degeneracy_tolerance(lengths)
        && embed_hyperboloid(lengths).is_ok()
}

/// Klein-model coordinates of the four vertices: central projection of the
/// hyperboloid onto the unit ball, under which geodesic simplices are
/// Euclidean simplices.
pub fn klein_vertices(lengths: &EdgeLengths) -> Result<[Vector3<f64>; 4], GeometryError> {
    let v = embed_hyperboloid(lengths)?;
    Ok(v.map(|p| Vector3::new(p[1], p[2], p[3]) / p[0]))
}

/// Monte Carlo volume oracle in the Klein model: sample points uniformly in
/// the Euclidean tetrahedron spanned by the Klein vertices, average the
/// volume density (1 - |x|^2)^(-2), and scale by the Euclidean volume.
/// Deterministic for a fixed seed; the error estimate is one standard error.
pub fn mc_volume_klein(
    lengths: &EdgeLengths,
    samples: usize,
    seed: u64,
) -> Result<HyperbolicVolume, GeometryError> {
    let k = klein_vertices(lengths)?;
    let euclidean_volume =
        ((k[1] - k[0]).cross(&(k[2] - k[0])).dot(&(k[3] - k[0])) / 6.0).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        // Dirichlet(1,1,1,1) barycentric weights = uniform on the simplex
        let mut w = [0.0; 4];
        let mut total = 0.0;
        for wi in &mut w {
            *wi = -(1.0 - rng.random::<f64>()).ln();
            total += *wi;
        }
        if total == 0.0 {
            w = [0.25; 4];
            total = 1.0;
        }
        let p = (k[0] * w[0] + k[1] * w[1] + k[2] * w[2] + k[3] * w[3]) / total;
        let density = {
            let r2 = p.norm_squared();
            1.0 / ((1.0 - r2) * (1.0 - r2))
        };
        sum += density;
        sum_sq += density * density;
    }

    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sum_sq - sum * sum / n) / (n - 1.0).max(1.0)).max(0.0);
    Ok(HyperbolicVolume {
        value: euclidean_volume * mean,
        abs_error_estimate: euclidean_volume * (variance / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean;
    use approx::assert_relative_eq;

    fn conformal(r: [f64; 4]) -> EdgeLengths {
        let mut l = [0.0; 6];
        for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            l[e] = r[i] + r[j];
        }
        EdgeLengths::new(l).unwrap()
    }

    #[test]
    fn gram_entries_match_cosh() {
        let g = gram_from_lengths(&conformal([1.0, 1.0, 1.0, 1.0]));
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert_eq!(g.entry(i, j), 1.0);
                } else {
                    assert_relative_eq!(g.entry(i, j), 2.0f64.cosh(), max_relative = 1e-15);
                    assert_relative_eq!(g.entry(i, j), 3.762_195_691_083_631_4, max_relative = 1e-15);
                }
            }
        }
    }

    #[test]
    fn gram_small_length_limit_is_all_ones() {
        let g = gram_from_lengths(&conformal([1e-8; 4]));
        for i in 0..4 {
            for j in 0..4 {
                assert!((g.entry(i, j) - 1.0).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn gram_is_monotone_entrywise_in_its_own_length() {
        let base = conformal([0.5, 0.7, 0.9, 1.1]);
        let g0 = gram_from_lengths(&base);
        let mut bumped = base.as_array();
        bumped[0] += 0.1;
        let g1 = gram_from_lengths(&EdgeLengths::new(bumped).unwrap());
        assert!(g1.entry(0, 1) > g0.entry(0, 1));
        for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            if e != 0 {
                assert_eq!(g1.entry(i, j), g0.entry(i, j));
            }
        }
    }

    #[test]
    fn gram_signature_detects_realizability() {
        let ok = gram_from_lengths(&conformal([1.0, 1.0, 1.0, 1.0]));
        assert_eq!(ok.signature(), (1, 3));
        assert!(ok.det() < 0.0);
        // radii (1,1,1,0.001) leave no room for the fourth ball
        let bad = gram_from_lengths(&conformal([1.0, 1.0, 1.0, 1e-3]));
        assert_ne!(bad.signature(), (1, 3));
        assert!(embed_hyperboloid(&conformal([1.0, 1.0, 1.0, 1e-3])).is_err());
    }

    #[test]
    fn embed_rejects_triangle_violation() {
        let l = EdgeLengths::new([5.0, 0.1, 0.1, 0.1, 0.1, 5.0]).unwrap();
        assert!(matches!(
            embed_hyperboloid(&l),
            Err(GeometryError::NotRealizable { .. })
        ));
    }

    #[test]
    fn embed_round_trips_distances() {
        for l in [conformal([1.0; 4]), conformal([0.1; 4])] {
            let v = embed_hyperboloid(&l).unwrap();
            for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
                assert_relative_eq!(
                    hyperbolic_distance(&v[i], &v[j]),
                    l.get(e),
                    max_relative = 1e-10
                );
            }
            for p in &v {
                assert_relative_eq!(minkowski_dot(p, p), -1.0, epsilon = 1e-12);
                assert!(p[0] > 0.0);
            }
        }
    }

    #[test]
    fn embed_round_trips_random_conformal_radii() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_817);
        let mut accepted = 0;
        while accepted < 1000 {
            let r: [f64; 4] = std::array::from_fn(|_| {
                (0.1f64.ln() + rng.random::<f64>() * (3.0f64.ln() - 0.1f64.ln())).exp()
            });
            let l = conformal(r);
            let Ok(v) = embed_hyperboloid(&l) else {
                continue; // some radii quadruples are not realizable
            };
            accepted += 1;
            for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
                assert_relative_eq!(
                    hyperbolic_distance(&v[i], &v[j]),
                    l.get(e),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn dihedral_angles_converge_to_euclidean_in_small_limit() {
        let shape = conformal([1.0; 4]);
        let t = 1e-3;
        let hyp = dihedral_angles_hyperbolic(&shape.scaled(t)).unwrap();
        let expected = (1.0f64 / 3.0).acos();
        for e in 0..6 {
            assert!((hyp.get(e) - expected).abs() < 1e-4);
        }
    }

    #[test]
    fn dihedral_angles_regular_match_closed_form() {
        // For the regular hyperbolic tetrahedron with edge l the Gram matrix
        // is symmetric under all vertex relabelings, and its adjugate gives
        // cos(alpha) = cosh(l) / (1 + 2 cosh(l)).
        let a = dihedral_angles_hyperbolic(&conformal([1.0; 4])).unwrap();
        let c = 2.0f64.cosh();
        let expected = (c / (1.0 + 2.0 * c)).acos();
        for e in 0..6 {
            assert_relative_eq!(a.get(e), expected, max_relative = 1e-12);
        }
        // strictly smaller than the Euclidean regular angle
        assert!(a.get(0) < (1.0f64 / 3.0).acos());
    }

    #[test]
    fn dihedral_angles_respect_vertex_stabilizer_symmetry() {
        let a = dihedral_angles_hyperbolic(&conformal([1.0, 1.0, 1.0, 2.0])).unwrap();
        assert_relative_eq!(a.get(0), a.get(1), max_relative = 1e-12);
        assert_relative_eq!(a.get(0), a.get(3), max_relative = 1e-12);
        assert_relative_eq!(a.get(2), a.get(4), max_relative = 1e-12);
        assert_relative_eq!(a.get(2), a.get(5), max_relative = 1e-12);
    }

    #[test]
    fn angles_are_continuous_along_the_scaling_path() {
        let shape = conformal([0.9, 1.1, 0.7, 1.3]);
        let euclid = euclidean::dihedral_angles_euclidean(&shape).unwrap().as_array();
        let grid: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
        let mut prev = euclid;
        for &t in &grid {
            let a = dihedral_angles_hyperbolic(&shape.scaled(t)).unwrap().as_array();
            for e in 0..6 {
                // small parameter steps move the angles by small amounts,
                // starting from the Euclidean limit at t -> 0
                assert!(
                    (a[e] - prev[e]).abs() < 0.02,
                    "jump at t={t}: {} -> {}",
                    prev[e],
                    a[e]
                );
            }
            prev = a;
        }
        let near_zero = dihedral_angles_hyperbolic(&shape.scaled(1e-3)).unwrap().as_array();
        for e in 0..6 {
            assert!((near_zero[e] - euclid[e]).abs() < 1e-4);
        }
    }

    #[test]
    fn volume_small_simplex_limit_matches_euclidean() {
        let l = conformal([1.0, 0.8, 1.2, 0.9]);
        let t = 1e-2;
        let v_h = volume_hyperbolic(&l.scaled(t)).unwrap().value;
        let v_e = euclidean::volume_euclidean(&l).unwrap() * t.powi(3);
        assert!((v_h - v_e).abs() / v_e < 1e-2, "v_h={v_h} v_e={v_e}");
    }

    #[test]
    fn volume_is_monotone_under_scaling() {
        let l = conformal([1.0; 4]);
        let mut last = 0.0;
        for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let v = volume_hyperbolic(&l.scaled(t)).unwrap().value;
            assert!(v > last, "volume not increasing at t={t}: {v} <= {last}");
            last = v;
        }
    }

    #[test]
    fn volume_agrees_with_monte_carlo_oracle() {
        let l = conformal([1.0; 4]);
        let quad = volume_hyperbolic(&l).unwrap();
        let mc = mc_volume_klein(&l, 200_000, 7).unwrap();
        let combined = (quad.abs_error_estimate.powi(2) + mc.abs_error_estimate.powi(2)).sqrt();
        assert!(
            (quad.value - mc.value).abs() <= 3.0 * combined,
            "quad={} mc={} +- {}",
            quad.value,
            mc.value,
            mc.abs_error_estimate
        );
        assert!(quad.abs_error_estimate < 1e-9);
    }

    #[test]
    fn volume_methods_agree() {
        let l = conformal([0.7, 1.1, 0.9, 1.3]);
        let by_parts = volume_hyperbolic(&l).unwrap();
        let rate = volume_hyperbolic_with(
            &l,
            &VolumeOptions {
                method: VolumeMethod::SchlafliRate,
                quad_tol: 1e-9,
                ..VolumeOptions::default()
            },
        )
        .unwrap();
        assert!((by_parts.value - rate.value).abs() < 1e-7);
        let richardson = volume_hyperbolic_with(
            &l,
            &VolumeOptions {
                method: VolumeMethod::SchlafliRate,
                quad_tol: 1e-9,
                richardson: true,
                ..VolumeOptions::default()
            },
        )
        .unwrap();
        assert!((by_parts.value - richardson.value).abs() < 1e-7);
    }

    #[test]
    fn schlafli_identity_holds_for_directional_derivatives() {
        // dV[delta] = -(1/2) sum_e l_e dalpha_e[delta]
        let l = conformal([0.9, 1.2, 0.8, 1.1]);
        let delta = [0.3, -0.2, 0.15, 0.25, -0.1, 0.05];
        let h = 1e-5;
        let perturb = |s: f64| {
            let mut a = l.as_array();
            for e in 0..6 {
                a[e] += s * delta[e];
            }
            EdgeLengths::new(a).unwrap()
        };
        let v_plus = volume_hyperbolic(&perturb(h)).unwrap().value;
        let v_minus = volume_hyperbolic(&perturb(-h)).unwrap().value;
        let dv = (v_plus - v_minus) / (2.0 * h);

        let a_plus = dihedral_angles_hyperbolic(&perturb(h)).unwrap().as_array();
        let a_minus = dihedral_angles_hyperbolic(&perturb(-h)).unwrap().as_array();
        let mut rhs = 0.0;
        for e in 0..6 {
            rhs += l.get(e) * (a_plus[e] - a_minus[e]) / (2.0 * h);
        }
        rhs *= -0.5;
        assert!((dv - rhs).abs() < 1e-6, "dv={dv} rhs={rhs}");
    }

    #[test]
    fn mc_volume_is_deterministic_and_se_scales() {
        let l = conformal([1.0, 0.8, 1.2, 0.9]);
        let a = mc_volume_klein(&l, 50_000, 123).unwrap();
        let b = mc_volume_klein(&l, 50_000, 123).unwrap();
        assert_eq!(a, b);
        let c = mc_volume_klein(&l, 200_000, 123).unwrap();
        let ratio = a.abs_error_estimate / c.abs_error_estimate;
        // 4x samples should halve the standard error, within a factor 1.5
        assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "ratio={ratio}");
    }
}
