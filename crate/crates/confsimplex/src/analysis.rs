//! Verification and rigidity layer: eigen-analysis of Hessians with rank
//! tolerances, randomized definiteness sweeps over conformal simplices, rank
//! scans along straight paths in radii space, and a damped Newton solver for
//! the prescribed solid-angle problem.
//!
//! Sweeps sample radii log-uniformly and keep the draws that form a
//! conformal simplex in the requested geometry; quadruples with a very small
//! radius leave no room for the fourth ball (the tangency pattern forces
//! l_ij = r_i + r_j, and below the Descartes bound no tetrahedron has those
//! lengths), so such draws are counted as rejected rather than as
//! failures. Failing *simplices* are always recorded, never raised
//! mid-sweep.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::GeometryError;
use crate::euclidean;
use crate::functionals::{grad_s, hessian_s, map_i};
use crate::hyperbolic;
use crate::types::{Geometry, Radii, SymMatrix};

/// Eigenvalues count toward the rank when |lambda| > tol * max |lambda|.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Largest accepted angle between the numerical kernel and its predicted span.
pub const DEFAULT_KERNEL_ANGLE_TOL: f64 = 1e-4;

/// Definiteness classes relevant to the claims under certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    NegativeDefinite,
    NegativeSemidefiniteRank3,
    Indefinite,
    Other,
}

/// Verdict object of an eigen-analysis: spectrum, rank under the tolerance,
/// kernel basis, and the definiteness class.
#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Count of eigenvalues with |lambda| > tolerance_used * max |lambda|.
    pub rank: usize,
    /// Orthonormal eigenvectors spanning the numerical kernel.
    pub kernel_basis: Vec<Vec<f64>>,
    pub classification: Definiteness,
    pub tolerance_used: f64,
    /// Angle (radians) between the reference vector and the kernel span,
    /// when a reference was supplied and the kernel is nonempty.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_angle: Option<f64>,
}

/// Full symmetric eigendecomposition with a relative rank tolerance.
pub fn analyze_symmetric(
    matrix: &DMatrix<f64>,
    reference: Option<&[f64]>,
    tol: f64,
) -> HessianReport {
    let n = matrix.nrows();
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let max_abs = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * max_abs;

    let rank = eigenvalues.iter().filter(|v| v.abs() > threshold).count();
    let kernel_basis: Vec<Vec<f64>> = order
        .iter()
        .filter(|&&k| eig.eigenvalues[k].abs() <= threshold)
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();

    debug_assert_eq!(rank + kernel_basis.len(), n);

    let negatives = eigenvalues.iter().filter(|&&v| v < -threshold).count();
    let positives = eigenvalues.iter().filter(|&&v| v > threshold).count();
    let classification = if rank == n && positives == 0 && max_abs > 0.0 {
        Definiteness::NegativeDefinite
    } else if rank == 3 && positives == 0 && negatives == 3 {
        Definiteness::NegativeSemidefiniteRank3
    } else if positives > 0 && negatives > 0 {
        Definiteness::Indefinite
    } else {
        Definiteness::Other
    };

    let reference_angle = reference.and_then(|v| {
        if kernel_basis.is_empty() {
            return None;
        }
        let v = DVector::from_column_slice(v).normalize();
        let proj_sq: f64 = kernel_basis
            .iter()
            .map(|k| {
                let k = DVector::from_column_slice(k);
                v.dot(&k).powi(2)
            })
            .sum();
        Some(proj_sq.sqrt().clamp(0.0, 1.0).acos())
    });

    HessianReport {
        eigenvalues,
        rank,
        kernel_basis,
        classification,
        tolerance_used: tol,
        reference_angle,
    }
}

/// [`analyze_symmetric`] for the symmetrized finite-difference matrices.
pub fn analyze_hessian<const N: usize>(
    hessian: &SymMatrix<N>,
    reference: Option<&[f64; N]>,
    tol: f64,
) -> HessianReport {
    analyze_symmetric(&hessian.to_dmatrix(), reference.map(|r| r.as_slice()), tol)
}

/// Log-uniform i.i.d. radii, deterministic per seed.
pub fn random_radii(seed: u64, n: usize, range: (f64, f64)) -> Vec<Radii> {
    assert!(
        0.0 < range.0 && range.0 < range.1,
        "need 0 < min < max, got {range:?}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (range.0.ln(), range.1.ln());
    (0..n)
        .map(|_| {
            let draw: [f64; 4] =
                std::array::from_fn(|_| (lo + rng.random::<f64>() * (hi - lo)).exp());
            Radii::new(draw).expect("log-uniform draws are positive")
        })
        .collect()
}

/// Whether the conformal lengths of `radii` form a simplex in `geometry`.
pub fn is_realizable(radii: &Radii, geometry: Geometry) -> bool {
    let lengths = map_i(radii);
    match geometry {
        Geometry::Euclidean => {
            euclidean::cayley_menger_det(&lengths) > euclidean::degeneracy_tolerance(&lengths)
        }
        Geometry::Hyperbolic => hyperbolic::embed_hyperboloid(&lengths).is_ok(),
    }
}

/// Log-uniform radii kept only when they realize a conformal simplex in
/// `geometry`; returns the accepted draws and the rejected count. Gives up
/// (returning fewer samples) if the range rejects almost everything.
pub fn random_conformal_radii(
    seed: u64,
    n: usize,
    range: (f64, f64),
    geometry: Geometry,
) -> (Vec<Radii>, usize) {
    assert!(
        0.0 < range.0 && range.0 < range.1,
        "need 0 < min < max, got {range:?}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (range.0.ln(), range.1.ln());
    let mut out = Vec::with_capacity(n);
    let mut rejected = 0usize;
    let cap = 1000 * n + 1000;
    while out.len() < n && out.len() + rejected < cap {
        let draw: [f64; 4] = std::array::from_fn(|_| (lo + rng.random::<f64>() * (hi - lo)).exp());
        let radii = Radii::new(draw).expect("log-uniform draws are positive");
        if is_realizable(&radii, geometry) {
            out.push(radii);
        } else {
            rejected += 1;
        }
    }
    (out, rejected)
}

/// Configuration of a randomized definiteness sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepConfig {
    /// Number of random conformal simplices to check (probes come on top).
    pub samples: usize,
    pub seed: u64,
    /// Log-uniform radii range.
    pub range: (f64, f64),
    pub rank_tol: f64,
    pub kernel_angle_tol: f64,
}

impl SweepConfig {
    /// Euclidean sweep defaults: radii in [0.1, 10].
    pub fn euclidean(samples: usize, seed: u64) -> Self {
        SweepConfig {
            samples,
            seed,
            range: (0.1, 10.0),
            rank_tol: DEFAULT_RANK_TOL,
            kernel_angle_tol: DEFAULT_KERNEL_ANGLE_TOL,
        }
    }

    /// Hyperbolic sweep defaults: radii in [0.1, 3], where volume growth
    /// keeps the numerics well conditioned.
    pub fn hyperbolic(samples: usize, seed: u64) -> Self {
        SweepConfig {
            samples,
            seed,
            range: (0.1, 3.0),
            rank_tol: DEFAULT_RANK_TOL,
            kernel_angle_tol: DEFAULT_KERNEL_ANGLE_TOL,
        }
    }
}

/// One checked simplex in a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub index: usize,
    /// Fixed probe rather than a random draw.
    pub probe: bool,
    pub radii: [f64; 4],
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_angle: Option<f64>,
    pub pass: bool,
}

/// A sample that violated the claim under certification (or could not be
/// evaluated), kept with enough data to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub index: usize,
    pub radii: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<HessianReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Outcome of a randomized sweep; `failures` empty means the sweep passed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub geometry: Geometry,
    /// Simplices actually checked (random draws plus probes).
    pub samples: usize,
    /// Radii draws rejected because they realize no conformal simplex.
    pub rejected: usize,
    pub seed: u64,
    pub range: (f64, f64),
    pub rank_tol: f64,
    pub kernel_angle_tol: f64,
    /// Largest eigenvalue that the claim requires to be negative, over all
    /// checked samples; negative margin means the sweep held with room.
    pub worst_margin: f64,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn run_sweep(
    geometry: Geometry,
    cfg: &SweepConfig,
    probes: &[[f64; 4]],
    check: impl Fn(&HessianReport) -> bool + Sync,
    margin_of: impl Fn(&HessianReport) -> f64 + Sync,
) -> SweepReport {
    let (random, rejected) = random_conformal_radii(cfg.seed, cfg.samples, cfg.range, geometry);
    let all: Vec<(bool, Radii)> = probes
        .iter()
        .map(|&p| (true, Radii::new(p).expect("probe radii are positive")))
        .chain(random.into_iter().map(|r| (false, r)))
        .collect();

    let results: Vec<(SweepRecord, Option<SweepFailure>, f64)> = all
        .par_iter()
        .enumerate()
        .map(|(index, (probe, radii))| {
            let arr = radii.as_array();
            match hessian_s(radii, geometry) {
                Ok(h) => {
                    let reference = match geometry {
                        Geometry::Euclidean => Some(&arr),
                        Geometry::Hyperbolic => None,
                    };
                    let report = analyze_hessian(&h, reference, cfg.rank_tol);
                    let kernel_ok = match geometry {
                        Geometry::Euclidean => report
                            .reference_angle
                            .is_some_and(|a| a <= cfg.kernel_angle_tol),
                        Geometry::Hyperbolic => true,
                    };
                    let pass = check(&report) && kernel_ok;
                    let margin = margin_of(&report);
                    let record = SweepRecord {
                        index,
                        probe: *probe,
                        radii: arr,
                        eigenvalues: report.eigenvalues.clone(),
                        rank: report.rank,
                        kernel_angle: report.reference_angle,
                        pass,
                    };
                    let failure = if pass {
                        None
                    } else {
                        Some(SweepFailure {
                            index,
                            radii: arr,
                            report: Some(report),
                            error: None,
                        })
                    };
                    (record, failure, margin)
                }
                Err(e) => {
                    let record = SweepRecord {
                        index,
                        probe: *probe,
                        radii: arr,
                        eigenvalues: Vec::new(),
                        rank: 0,
                        kernel_angle: None,
                        pass: false,
                    };
                    let failure = Some(SweepFailure {
                        index,
                        radii: arr,
                        report: None,
                        error: Some(e.to_string()),
                    });
                    (record, failure, f64::NEG_INFINITY)
                }
            }
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut worst_margin = f64::NEG_INFINITY;
    for (record, failure, margin) in results {
        worst_margin = worst_margin.max(margin);
        records.push(record);
        failures.extend(failure);
    }

    SweepReport {
        geometry,
        samples: records.len(),
        rejected,
        seed: cfg.seed,
        range: cfg.range,
        rank_tol: cfg.rank_tol,
        kernel_angle_tol: cfg.kernel_angle_tol,
        worst_margin,
        records,
        failures,
    }
}

/// Certify that H(S) is negative semidefinite of rank 3 with kernel along
/// the radii vector, over random Euclidean conformal simplices plus the
/// regular probe and a probe near the realizability boundary.
pub fn verify_euclidean_definiteness(cfg: &SweepConfig) -> SweepReport {
    // (1,1,1,b) is realizable down to b = 2/sqrt(3) - 1 ~ 0.1547
    let probes = [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 0.16]];
    run_sweep(
        Geometry::Euclidean,
        cfg,
        &probes,
        |report| report.classification == Definiteness::NegativeSemidefiniteRank3,
        |report| report.eigenvalues[2],
    )
}

/// Certify that H(S) is negative definite over random hyperbolic conformal
/// simplices plus the regular probe.
pub fn verify_hyperbolic_definiteness(cfg: &SweepConfig) -> SweepReport {
    let probes = [[1.0, 1.0, 1.0, 1.0]];
    run_sweep(
        Geometry::Hyperbolic,
        cfg,
        &probes,
        |report| report.classification == Definiteness::NegativeDefinite,
        |report| report.eigenvalues[3],
    )
}

/// Rank of H(S) at one point of a straight path in radii space.
#[derive(Debug, Clone, Serialize)]
pub struct PathStep {
    pub t: f64,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

/// Ranks of H(S) along the segment r(t) = (1-t) from + t to, which stays in
/// the positive cone. `steps` points including both endpoints; identical
/// endpoints collapse to a single step.
pub fn path_rank_scan(
    from: &Radii,
    to: &Radii,
    steps: usize,
    geometry: Geometry,
    tol: f64,
) -> Result<Vec<PathStep>, GeometryError> {
    let ts: Vec<f64> = if from == to || steps <= 1 {
        vec![0.0]
    } else {
        (0..steps).map(|j| j as f64 / (steps - 1) as f64).collect()
    };
    ts.into_iter()
        .map(|t| {
            let a = from.as_array();
            let b = to.as_array();
            let r = Radii::new(std::array::from_fn(|i| (1.0 - t) * a[i] + t * b[i]))
                .expect("positive cone is convex");
            let h = hessian_s(&r, geometry)?;
            let report = analyze_hessian(&h, None, tol);
            Ok(PathStep {
                t,
                rank: report.rank,
                eigenvalues: report.eigenvalues,
            })
        })
        .collect()
}

/// One accepted Newton iterate.
#[derive(Debug, Clone, Serialize)]
pub struct SolveIterate {
    pub radii: [f64; 4],
    pub residual_norm: f64,
}

/// Outcome of the prescribed solid-angle solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub radii: Radii,
    /// Max-norm of S_i(r) - target_i at the final iterate.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<SolveIterate>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Componentwise residual tolerance.
    pub tol: f64,
    /// Euclidean scale-constraint tolerance.
    pub scale_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: u32,
    /// Record the iterate path in the result.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            scale_tol: 1e-12,
            max_iterations: 100,
            max_halvings: 60,
            trace: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("Newton did not converge within {max_iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        max_iterations: usize,
        residual: f64,
        best: Box<SolveResult>,
    },
    #[error("line search stalled at iteration {iteration} after {halvings} step halvings")]
    LineSearchFailure {
        iteration: usize,
        halvings: u32,
        best: Box<SolveResult>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl SolveError {
    /// Best iterate reached before the failure, when one exists.
    pub fn best(&self) -> Option<&SolveResult> {
        match self {
            SolveError::NotConverged { best, .. } | SolveError::LineSearchFailure { best, .. } => {
                Some(best)
            }
            SolveError::Geometry(_) => None,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration for S_i(r) = target_i, using H(S) as the Jacobian
/// of r -> (S_i). Negative definiteness (hyperbolic) makes the square system
/// nonsingular; in the Euclidean case S is scale-invariant, so the linear
/// gauge constraint sum r_i = sum start_i is appended as a bordered row and
/// the solution is the representative with the start's scale.
pub fn solve_prescribed_solid_angles(
    target: &[f64; 4],
    geometry: Geometry,
    start: &Radii,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    let scale_sum = start.sum();
    let constraint = |r: &Radii| match geometry {
        Geometry::Euclidean => r.sum() - scale_sum,
        Geometry::Hyperbolic => 0.0,
    };
    let residual = |r: &Radii| -> Result<[f64; 4], GeometryError> {
        let s = grad_s(r, geometry)?;
        Ok(std::array::from_fn(|i| s.get(i) - target[i]))
    };
    let merit = |f: &[f64; 4], c: f64| (f.iter().map(|x| x * x).sum::<f64>() + c * c).sqrt();

    let mut r = *start;
    let mut f = residual(&r)?;
    let mut c = constraint(&r);
    let mut m = merit(&f, c);
    let mut iterations = 0usize;
    let mut path = vec![SolveIterate {
        radii: r.as_array(),
        residual_norm: inf_norm(&f),
    }];

    let result = |r: Radii, f: &[f64; 4], iterations: usize, converged: bool, path: &[SolveIterate], trace: bool| {
        SolveResult {
            radii: r,
            residual_norm: inf_norm(f),
            iterations,
            converged,
            path: trace.then(|| path.to_vec()),
        }
    };

    loop {
        let converged = inf_norm(&f) < opts.tol && c.abs() <= opts.scale_tol;
        if converged {
            return Ok(result(r, &f, iterations, true, &path, opts.trace));
        }
        if iterations >= opts.max_iterations {
            return Err(SolveError::NotConverged {
                max_iterations: opts.max_iterations,
                residual: inf_norm(&f),
                best: Box::new(result(r, &f, iterations, false, &path, true)),
            });
        }

        // a Hessian failure at an accepted iterate (finite-difference probes
        // crossing the realizability boundary) ends the solve with the best
        // iterate rather than surfacing as a domain error
        let Ok(h) = hessian_s(&r, geometry) else {
            return Err(SolveError::NotConverged {
                max_iterations: opts.max_iterations,
                residual: inf_norm(&f),
                best: Box::new(result(r, &f, iterations, false, &path, true)),
            });
        };
        let delta: [f64; 4] = match geometry {
            Geometry::Hyperbolic => {
                let a = h.to_dmatrix();
                let rhs = DVector::from_iterator(4, f.iter().map(|x| -x));
                match a.lu().solve(&rhs) {
                    Some(d) => std::array::from_fn(|i| d[i]),
                    None => {
                        return Err(SolveError::NotConverged {
                            max_iterations: opts.max_iterations,
                            residual: inf_norm(&f),
                            best: Box::new(result(r, &f, iterations, false, &path, true)),
                        });
                    }
                }
            }
            Geometry::Euclidean => {
                // bordered system [[H, 1], [1^T, 0]] [delta; mu] = [-f; -c]
                let mut a = DMatrix::zeros(5, 5);
                for i in 0..4 {
                    for j in 0..4 {
                        a[(i, j)] = h.get(i, j);
                    }
                    a[(i, 4)] = 1.0;
                    a[(4, i)] = 1.0;
                }
                let mut rhs = DVector::zeros(5);
                for i in 0..4 {
                    rhs[i] = -f[i];
                }
                rhs[4] = -c;
                match a.lu().solve(&rhs) {
                    Some(d) => std::array::from_fn(|i| d[i]),
                    None => {
                        return Err(SolveError::NotConverged {
                            max_iterations: opts.max_iterations,
                            residual: inf_norm(&f),
                            best: Box::new(result(r, &f, iterations, false, &path, true)),
                        });
                    }
                }
            }
        };

        // backtracking line search on the merit norm
        let mut step = 1.0f64;
        let mut halvings = 0u32;
        loop {
            let candidate: [f64; 4] =
                std::array::from_fn(|i| r.as_array()[i] + step * delta[i]);
            if candidate.iter().all(|&x| x > 0.0)
                && let Ok(rc) = Radii::new(candidate)
                && let Ok(fc) = residual(&rc)
            {
                let cc = constraint(&rc);
                let mc = merit(&fc, cc);
                if mc <= (1.0 - 1e-4 * step) * m {
                    r = rc;
                    f = fc;
                    c = cc;
                    m = mc;
                    break;
                }
            }
            step *= 0.5;
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(SolveError::LineSearchFailure {
                    iteration: iterations,
                    halvings,
                    best: Box::new(result(r, &f, iterations, false, &path, true)),
                });
            }
        }

        iterations += 1;
        path.push(SolveIterate {
            radii: r.as_array(),
            residual_norm: inf_norm(&f),
        });
    }
}
