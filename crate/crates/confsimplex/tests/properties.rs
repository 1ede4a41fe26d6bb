//! Cross-module invariants: oracle equivalence for the angle computation,
//! realizability of conformal radii, scale invariance, permutation
//! equivariance, gradient contracts, and the Schläfli identity.

use std::f64::consts::PI;

use confsimplex::analysis::{self, DEFAULT_RANK_TOL, analyze_hessian, analyze_symmetric};
use confsimplex::euclidean::{
    cayley_menger_det, degeneracy_tolerance, dihedral_angles_euclidean, solid_angles,
};
use confsimplex::functionals::{
    dihedral_angles, eval_r, eval_s, fd_step, grad_r, grad_s, hessian_r, hessian_s, jacobian_i,
    map_i,
};
use confsimplex::hyperbolic::{embed_hyperboloid, volume_hyperbolic};
use confsimplex::pairs::{EDGE_PAIRS, opposite_edge, pair_index};
use confsimplex::{EdgeLengths, Geometry, Radii};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Independent recomputation of the Euclidean dihedral angles purely from
/// inner products of edge vectors, every dot product expanded from squared
/// lengths. No coordinates are constructed, so this shares nothing with the
/// embedding code path.
fn gram_dihedral_oracle(l: &EdgeLengths) -> [f64; 6] {
    let sq = |i: usize, j: usize| {
        if i == j {
            return 0.0;
        }
        let d = l.between(i, j);
        d * d
    };
    // (p_a - p_i) . (p_b - p_i) in terms of squared lengths
    let dot = |i: usize, a: usize, b: usize| 0.5 * (sq(i, a) + sq(i, b) - sq(a, b));
    let mut out = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        let (k, m) = EDGE_PAIRS[opposite_edge(e)];
        let uu = dot(i, j, j);
        let vv = dot(i, k, k);
        let ww = dot(i, m, m);
        let uv = dot(i, j, k);
        let uw = dot(i, j, m);
        let vw = dot(i, k, m);
        let cross_dot = uu * vw - uv * uw;
        let n1 = (uu * vv - uv * uv).sqrt();
        let n2 = (uu * ww - uw * uw).sqrt();
        out[e] = (cross_dot / (n1 * n2)).clamp(-1.0, 1.0).acos();
    }
    out
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn radii_in(lo: f64, hi: f64) -> impl Strategy<Value = Radii> {
    prop::array::uniform4(log_uniform(lo, hi)).prop_map(|a| Radii::new(a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Radii with pairwise ratio at most 4 always embed: their conformal
    /// lengths pass the Cayley-Menger gate with positive vertex excess, and
    /// the hyperboloid embedding goes through as well.
    #[test]
    fn bounded_ratio_conformal_radii_are_realizable(r in radii_in(0.5, 2.0)) {
        let l = map_i(&r);
        prop_assert!(cayley_menger_det(&l) > degeneracy_tolerance(&l));
        let s = solid_angles(&dihedral_angles_euclidean(&l).unwrap());
        for v in 0..4 {
            prop_assert!(s.get(v) > 0.0 && s.get(v) < 2.0 * PI);
        }
        prop_assert!(embed_hyperboloid(&l).is_ok());
    }

    /// Embedded-angle path and the Gram oracle agree.
    #[test]
    fn euclidean_angles_match_gram_oracle(r in radii_in(0.5, 2.0)) {
        let l = map_i(&r);
        let angles = dihedral_angles_euclidean(&l).unwrap().as_array();
        let oracle = gram_dihedral_oracle(&l);
        for e in 0..6 {
            prop_assert!((angles[e] - oracle[e]).abs() < 1e-10,
                "edge {e}: {} vs oracle {}", angles[e], oracle[e]);
        }
    }

    /// Dihedral angles only depend on the shape, not the scale.
    #[test]
    fn euclidean_angles_are_scale_invariant(
        r in radii_in(0.5, 2.0),
        t in log_uniform(0.1, 10.0),
    ) {
        let base = dihedral_angles_euclidean(&map_i(&r)).unwrap().as_array();
        let scaled = dihedral_angles_euclidean(&map_i(&r.scaled(t))).unwrap().as_array();
        for e in 0..6 {
            prop_assert!((base[e] - scaled[e]).abs() < 1e-10);
        }
    }

    /// The conformal length map is linear.
    #[test]
    fn map_i_is_linear(
        r in radii_in(0.2, 5.0),
        s in radii_in(0.2, 5.0),
        a in 0.1f64..4.0,
        b in 0.1f64..4.0,
    ) {
        let combined = Radii::new(std::array::from_fn(|i| {
            a * r.as_array()[i] + b * s.as_array()[i]
        })).unwrap();
        let lhs = map_i(&combined).as_array();
        let ri = map_i(&r).as_array();
        let si = map_i(&s).as_array();
        for e in 0..6 {
            prop_assert!((lhs[e] - (a * ri[e] + b * si[e])).abs() < 1e-12);
        }
    }
}

/// All 24 vertex relabelings: S and R are invariant, angle data is permuted
/// by the induced action on vertices and pairs.
#[test]
fn permutation_equivariance() {
    let perms: Vec<[usize; 4]> = {
        let mut out = Vec::new();
        let items = [0usize, 1, 2, 3];
        for a in 0..4 {
            for b in 0..4 {
                if b == a {
                    continue;
                }
                for c in 0..4 {
                    if c == a || c == b {
                        continue;
                    }
                    let d = 6 - a - b - c;
                    out.push([items[a], items[b], items[c], items[d]]);
                }
            }
        }
        out
    };
    assert_eq!(perms.len(), 24);

    let r = Radii::new([0.6, 1.0, 1.4, 0.8]).unwrap();
    let l = map_i(&r);
    let angles = dihedral_angles_euclidean(&l).unwrap();
    let solids = solid_angles(&angles);
    let s_val = eval_s(&r, Geometry::Euclidean).unwrap();
    let r_val = eval_r(&l, Geometry::Euclidean).unwrap();

    for perm in &perms {
        let rp = r.relabeled(perm);
        let lp = map_i(&rp);
        assert_eq!(lp, l.relabeled(perm));
        let angles_p = dihedral_angles_euclidean(&lp).unwrap();
        let solids_p = solid_angles(&angles_p);
        for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            let ep = pair_index(perm[i], perm[j]);
            assert!((angles_p.get(ep) - angles.get(e)).abs() < 1e-12);
        }
        for (v, &pv) in perm.iter().enumerate() {
            assert!((solids_p.get(pv) - solids.get(v)).abs() < 1e-12);
        }
        assert!((eval_s(&rp, Geometry::Euclidean).unwrap() - s_val).abs() < 1e-12);
        assert!((eval_r(&lp, Geometry::Euclidean).unwrap() - r_val).abs() < 1e-12);
    }

    // spot-check the hyperbolic functionals on a few relabelings (volume
    // quadrature repeats per permutation, so keep the count small)
    let s_hyp = eval_s(&r, Geometry::Hyperbolic).unwrap();
    let r_hyp = eval_r(&l, Geometry::Hyperbolic).unwrap();
    for perm in [[1, 0, 2, 3], [3, 2, 1, 0], [1, 2, 3, 0]] {
        let rp = r.relabeled(&perm);
        assert!((eval_s(&rp, Geometry::Hyperbolic).unwrap() - s_hyp).abs() < 1e-9);
        assert!((eval_r(&map_i(&rp), Geometry::Hyperbolic).unwrap() - r_hyp).abs() < 1e-9);
    }
}

/// Wide-range sampling statistics: every rejected draw fails the
/// Cayley-Menger gate, acceptance and rejection both occur, and the pocket
/// configuration (three balls with no room for a small fourth) is the
/// counterexample showing not every positive radii tuple is conformal.
#[test]
fn wide_range_rejection_matches_cayley_menger_gate() {
    let draws = analysis::random_radii(2024, 1000, (0.1, 10.0));
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    for r in &draws {
        let l = map_i(r);
        let realizable = cayley_menger_det(&l) > degeneracy_tolerance(&l);
        assert_eq!(realizable, analysis::is_realizable(r, Geometry::Euclidean));
        if realizable {
            accepted += 1;
            // Euclidean-realizable conformal lengths embed hyperbolically too
            assert!(embed_hyperboloid(&l).is_ok());
        } else {
            rejected += 1;
        }
    }
    assert!(accepted > 0 && rejected > 0, "accepted={accepted} rejected={rejected}");

    let pocket = Radii::new([1.0, 1.0, 1.0, 1e-3]).unwrap();
    assert!(cayley_menger_det(&map_i(&pocket)) < 0.0);
}

/// Every analytic gradient matches central differences at step
/// 1e-5 * input scale, on random conformal simplices.
#[test]
fn gradient_contracts_on_random_samples() {
    let (samples, _) = analysis::random_conformal_radii(31, 20, (0.3, 3.0), Geometry::Euclidean);
    for r in &samples {
        let l = map_i(r);
        let grad = grad_r(&l, Geometry::Euclidean).unwrap();
        let h = fd_step(&l.as_array());
        for e in 0..6 {
            let mut plus = l.as_array();
            plus[e] += h;
            let mut minus = l.as_array();
            minus[e] -= h;
            let fd = (eval_r(&EdgeLengths::new(plus).unwrap(), Geometry::Euclidean).unwrap()
                - eval_r(&EdgeLengths::new(minus).unwrap(), Geometry::Euclidean).unwrap())
                / (2.0 * h);
            assert!((fd - grad.get(e)).abs() < 1e-6);
        }
    }

    // Euclidean-gated draws stay in the scaling-path volume domain
    let (samples, _) = analysis::random_conformal_radii(32, 3, (0.3, 2.0), Geometry::Euclidean);
    for r in &samples {
        let grad = grad_s(r, Geometry::Hyperbolic).unwrap();
        let h = fd_step(&r.as_array());
        for v in 0..4 {
            let mut plus = r.as_array();
            plus[v] += h;
            let mut minus = r.as_array();
            minus[v] -= h;
            let fd = (eval_s(&Radii::new(plus).unwrap(), Geometry::Hyperbolic).unwrap()
                - eval_s(&Radii::new(minus).unwrap(), Geometry::Hyperbolic).unwrap())
                / (2.0 * h);
            assert!((fd - grad.get(v)).abs() < 1e-6);
        }
    }
}

/// Euclidean Schläfli identity: sum l_ij dalpha_ij[delta] = 0 for random
/// directions; hyperbolic: sum l_ij dalpha_ij[delta] = -2 dvol[delta].
#[test]
fn schlafli_identity_in_both_geometries() {
    let directions = [
        [0.4, -0.3, 0.2, 0.1, -0.2, 0.3],
        [-0.1, 0.5, -0.4, 0.2, 0.3, -0.2],
    ];
    let (samples, _) = analysis::random_conformal_radii(77, 3, (0.4, 2.0), Geometry::Euclidean);
    for r in &samples {
        let l = map_i(r);
        let scale = l.geometric_mean();
        let h = 1e-5 * scale;
        for delta in &directions {
            let perturb = |s: f64| {
                let mut a = l.as_array();
                for e in 0..6 {
                    a[e] += s * delta[e];
                }
                EdgeLengths::new(a).unwrap()
            };
            let da: [f64; 6] = {
                let p = dihedral_angles(&perturb(h), Geometry::Euclidean).unwrap().as_array();
                let m = dihedral_angles(&perturb(-h), Geometry::Euclidean)
                    .unwrap()
                    .as_array();
                std::array::from_fn(|e| (p[e] - m[e]) / (2.0 * h))
            };
            let total: f64 = (0..6).map(|e| l.get(e) * da[e]).sum();
            assert!(total.abs() < 1e-7, "euclidean residual {total}");

            let dap: [f64; 6] = {
                let p = dihedral_angles(&perturb(h), Geometry::Hyperbolic).unwrap().as_array();
                let m = dihedral_angles(&perturb(-h), Geometry::Hyperbolic)
                    .unwrap()
                    .as_array();
                std::array::from_fn(|e| (p[e] - m[e]) / (2.0 * h))
            };
            let lhs: f64 = (0..6).map(|e| l.get(e) * dap[e]).sum();
            let dv = (volume_hyperbolic(&perturb(h)).unwrap().value
                - volume_hyperbolic(&perturb(-h)).unwrap().value)
                / (2.0 * h);
            assert!((lhs + 2.0 * dv).abs() < 1e-6, "hyperbolic residual {}", lhs + 2.0 * dv);
        }
    }
}

/// rank(H(S)) equals rank(J^T H(R) J): the length-space and radii-space
/// Hessians certify the same rank structure.
#[test]
fn rank_consistency_between_hessians() {
    let j = jacobian_i();
    let jd = DMatrix::from_fn(6, 4, |a, b| j[(a, b)]);
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let (samples, _) = analysis::random_conformal_radii(55, 5, (0.4, 2.0), geometry);
        for r in &samples {
            let hs = hessian_s(r, geometry).unwrap();
            let hr = hessian_r(&map_i(r), geometry).unwrap();
            let pulled = jd.transpose() * hr.to_dmatrix() * &jd;
            let rank_direct = analyze_hessian(&hs, None, DEFAULT_RANK_TOL).rank;
            let rank_pulled = analyze_symmetric(&pulled, None, DEFAULT_RANK_TOL).rank;
            assert_eq!(rank_direct, rank_pulled, "{geometry}");
            let expected = match geometry {
                Geometry::Euclidean => 3,
                Geometry::Hyperbolic => 4,
            };
            assert_eq!(rank_direct, expected, "{geometry}");
        }
    }
}

/// The two volume estimators agree within combined error bars across the
/// sampling range used for hyperbolic work.
#[test]
fn volume_estimators_agree_on_random_simplices() {
    let (samples, _) = analysis::random_conformal_radii(404, 100, (0.1, 2.0), Geometry::Euclidean);
    for (i, r) in samples.iter().enumerate() {
        let l = map_i(r);
        let quad = volume_hyperbolic(&l).unwrap();
        let mc = confsimplex::hyperbolic::mc_volume_klein(&l, 200_000, 7000 + i as u64).unwrap();
        let combined = (quad.abs_error_estimate.powi(2) + mc.abs_error_estimate.powi(2)).sqrt();
        assert!(
            (quad.value - mc.value).abs() <= 3.0 * combined,
            "sample {i}: quad {} vs mc {} +- {}",
            quad.value,
            mc.value,
            mc.abs_error_estimate
        );
    }
}
