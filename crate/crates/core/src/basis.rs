//! Legendre basis on the reference cell [-1, 1] and Gauss-Legendre quadrature.
//!
//! The basis is the classical (non-orthonormal) Legendre family with
//! `P_m(1) = 1`, so the mode-0 coefficient of an expansion is exactly the
//! cell average.

use crate::error::{Error, Result};

/// Highest supported Legendre mode.
pub const MAX_MODE: usize = 4;

/// Evaluate `P_m(xi)` for modes 0..=4.
pub fn legendre_eval(mode: usize, xi: f64) -> Result<f64> {
    if mode > MAX_MODE {
        return Err(Error::UnsupportedDegree(mode));
    }
    Ok(legendre(mode, xi))
}

/// Unchecked evaluation used in inner loops; callers stay within 0..=4.
#[inline]
pub(crate) fn legendre(mode: usize, xi: f64) -> f64 {
    match mode {
        0 => 1.0,
        1 => xi,
        2 => 0.5 * (3.0 * xi * xi - 1.0),
        3 => 0.5 * xi * (5.0 * xi * xi - 3.0),
        _ => 0.125 * ((35.0 * xi * xi - 30.0) * xi * xi + 3.0),
    }
}

/// Derivative `P_m'(xi)`.
#[inline]
pub(crate) fn legendre_deriv(mode: usize, xi: f64) -> f64 {
    match mode {
        0 => 0.0,
        1 => 1.0,
        2 => 3.0 * xi,
        3 => 0.5 * (15.0 * xi * xi - 3.0),
        _ => 0.5 * xi * (35.0 * xi * xi - 15.0),
    }
}

/// Norm of the mode: integral of `P_m^2` over [-1, 1].
#[inline]
pub(crate) fn mode_norm(mode: usize) -> f64 {
    2.0 / (2.0 * mode as f64 + 1.0)
}

/// Gauss-Legendre rule on [-1, 1]: weights sum to 2, exact for degree 2n-1.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights, n in 1..=8.
///
/// Roots of the degree-n Legendre polynomial by Newton iteration from the
/// Chebyshev initial guess; weights via `2 / ((1 - x^2) Pn'(x)^2)`.
pub fn gauss_quadrature(n_points: usize) -> Result<Quadrature> {
    if n_points == 0 || n_points > 8 {
        return Err(Error::UnsupportedQuadrature(n_points));
    }
    let n = n_points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        // descending initial guess: largest root first
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_value_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_value_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Quadrature { nodes, weights })
}

/// Arbitrary-degree Legendre value and derivative via the three-term
/// recurrence (quadrature construction only).
fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
