//! Adaptive composite Gauss-Legendre quadrature on 15-point panels.
//!
//! Panels are refined by bisection; a panel is accepted when the difference
//! between its 15-point value and the sum of the two half-panel values fits
//! inside the panel's share of the global tolerance. The accepted value is
//! the refined one, and the accumulated differences give a conservative
//! absolute-error estimate.

use std::sync::OnceLock;

const PANEL_POINTS: usize = 15;

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre polynomial.
fn gauss_legendre_15() -> &'static ([f64; PANEL_POINTS], [f64; PANEL_POINTS]) {
    static RULE: OnceLock<([f64; PANEL_POINTS], [f64; PANEL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_POINTS;
        let mut nodes = [0.0; PANEL_POINTS];
        let mut weights = [0.0; PANEL_POINTS];
        for k in 0..n {
            // standard initial guess for the k-th root of P_n
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Value and derivative of the degree-n Legendre polynomial at x.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug)]
pub(crate) enum QuadError<E> {
    Integrand(E),
    /// Refinement hit the depth cap before the tolerance was met.
    Refinement {
        error_estimate: f64,
        tol: f64,
        depth: u32,
    },
}

fn panel_sum<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<f64, QuadError<E>> {
    let (nodes, weights) = gauss_legendre_15();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x).map_err(QuadError::Integrand)?;
    }
    Ok(sum * half)
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`.
pub(crate) fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Quadrature, QuadError<E>> {
    let width = b - a;
    let coarse = panel_sum(&mut f, a, b)?;
    let mut stack = vec![(a, b, coarse, 0u32)];
    let mut value = 0.0;
    let mut error_estimate = 0.0;

    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel_sum(&mut f, lo, mid)?;
        let right = panel_sum(&mut f, mid, hi)?;
        let fine = left + right;
        let err = (fine - coarse).abs();
        // accept on the panel's share of the budget, or at the roundoff
        // floor of the panel values themselves
        if err <= tol * (hi - lo) / width
            || err <= 16.0 * f64::EPSILON * (coarse.abs() + fine.abs())
        {
            value += fine;
            error_estimate += err;
        } else if depth >= max_depth {
            return Err(QuadError::Refinement {
                error_estimate: err,
                tol,
                depth,
            });
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }

    Ok(Quadrature {
        value,
        error_estimate,
    })
}
