//! Classifier metrics, L1 solution errors, and convergence tables.

use crate::error::{Error, Result};
use crate::solution::{projection_quadrature, ModalSolution1D, ModalSolution2D};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Count the four prediction cases.
pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<Confusion> {
    if pred.len() != truth.len() {
        return Err(Error::DimMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (1, 1) => c.tp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fp += 1,
            _ => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// A ratio metric; `degenerate` marks a zero denominator (value 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub value: f64,
    pub degenerate: bool,
}

impl Metric {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Metric {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Metric {
                value: num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

pub fn accuracy(c: &Confusion) -> Metric {
    Metric::ratio(c.tp + c.tn, c.total())
}

pub fn recall(c: &Confusion) -> Metric {
    Metric::ratio(c.tp, c.tp + c.fn_)
}

pub fn precision(c: &Confusion) -> Metric {
    Metric::ratio(c.tp, c.tp + c.fp)
}

/// L1 norm of (u_h - exact) per variable, via p+2-point Gauss quadrature.
pub fn l1_error_1d(sol: &ModalSolution1D, mut exact: impl FnMut(f64, &mut [f64])) -> Vec<f64> {
    let quad = projection_quadrature(sol.degree);
    let mut err = vec![0.0; sol.n_vars];
    let mut vals = vec![0.0; sol.n_vars];
    for cell in 0..sol.mesh.n_cells {
        for (q, &xi) in quad.nodes.iter().enumerate() {
            let x = sol.mesh.to_physical(cell, xi);
            exact(x, &mut vals);
            let w = quad.weights[q] * 0.5 * sol.mesh.h;
            for var in 0..sol.n_vars {
                let uh = sol.eval_at(cell, var, xi).expect("valid indices");
                err[var] += w * (uh - vals[var]).abs();
            }
        }
    }
    err
}

/// Scalar 2D L1 error via tensor Gauss quadrature.
pub fn l1_error_2d(sol: &ModalSolution2D, mut exact: impl FnMut(f64, f64) -> f64) -> f64 {
    let quad = projection_quadrature(sol.degree);
    let mut err = 0.0;
    let jac = 0.25 * sol.mesh.dx * sol.mesh.dy;
    for iy in 0..sol.mesh.n_y {
        for ix in 0..sol.mesh.n_x {
            for (qe, &eta) in quad.nodes.iter().enumerate() {
                for (qx, &xi) in quad.nodes.iter().enumerate() {
                    let (x, y) = sol.mesh.to_physical(ix, iy, xi, eta);
                    let uh = sol.eval_at(ix, iy, 0, xi, eta).expect("valid indices");
                    err += quad.weights[qe] * quad.weights[qx] * jac * (uh - exact(x, y)).abs();
                }
            }
        }
    }
    err
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub rate: f64,
}

/// Rate between successive rows: `ln(e_prev/e) / ln(N/N_prev)`; the first
/// row carries rate 0 by convention.
pub fn convergence_table(errors: &[f64], ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if errors.len() != ns.len() {
        return Err(Error::DimMismatch {
            expected: ns.len(),
            got: errors.len(),
        });
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "grid sizes must be strictly increasing".into(),
        ));
    }
    if errors.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidArgument("errors must be positive".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for k in 0..ns.len() {
        let rate = if k == 0 {
            0.0
        } else {
            (errors[k - 1] / errors[k]).ln() / (ns[k] as f64 / ns[k - 1] as f64).ln()
        };
        rows.push(ConvergenceRow {
            n: ns[k],
            error: errors[k],
            rate,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Boundary, Mesh1D};
    use crate::solution::project_scalar_1d;

    #[test]
    fn confusion_cases() {
        let c = confusion(&[1, 0], &[1, 0]).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (1, 1, 0, 0));
        let c = confusion(&[1], &[0]).unwrap();
        assert_eq!(c.fp, 1);
        let c = confusion(&[], &[]).unwrap();
        assert_eq!(c.total(), 0);
        assert!(confusion(&[1], &[0, 1]).is_err());
    }

    #[test]
    fn metric_values() {
        let c = Confusion {
            tp: 8,
            tn: 0,
            fp: 0,
            fn_: 2,
        };
        assert!((recall(&c).value - 0.8).abs() < 1e-15);
        let perfect = Confusion {
            tp: 5,
            tn: 5,
            fp: 0,
            fn_: 0,
        };
        assert_eq!(accuracy(&perfect).value, 1.0);
        assert_eq!(recall(&perfect).value, 1.0);
        assert_eq!(precision(&perfect).value, 1.0);
        // all-negative predictor on balanced data
        let c = confusion(&[0, 0, 0, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!(accuracy(&c).value, 0.5);
        assert_eq!(recall(&c).value, 0.0);
        assert!(precision(&c).degenerate);
    }

    #[test]
    fn accuracy_two_routes_agree() {
        let pred = [1u8, 0, 1, 1, 0, 0, 1];
        let truth = [1u8, 1, 1, 0, 0, 1, 1];
        let c = confusion(&pred, &truth).unwrap();
        let direct = pred
            .iter()
            .zip(&truth)
            .filter(|(p, t)| p == t)
            .count() as f64
            / pred.len() as f64;
        assert_eq!(accuracy(&c).value, direct);
    }

    #[test]
    fn l1_of_projected_polynomial_vanishes() {
        let mesh = Mesh1D::unit(8, Boundary::Periodic).unwrap();
        let f = |x: f64| 1.0 + 2.0 * x - 0.5 * x * x;
        let sol = project_scalar_1d(&mesh, 2, f).unwrap();
        let e = l1_error_1d(&sol, |x, out| out[0] = f(x));
        assert!(e[0] < 1e-12);
    }

    #[test]
    fn l1_of_zero_vs_one_is_one() {
        let mesh = Mesh1D::unit(8, Boundary::Periodic).unwrap();
        let sol = project_scalar_1d(&mesh, 1, |_| 0.0).unwrap();
        let e = l1_error_1d(&sol, |_, out| out[0] = 1.0);
        assert!((e[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn l1_matches_dense_riemann_sum() {
        let mesh = Mesh1D::unit(20, Boundary::Periodic).unwrap();
        let f = crate::solvers::ic::gaussian1d;
        let sol = project_scalar_1d(&mesh, 1, f).unwrap();
        let e = l1_error_1d(&sol, |x, out| out[0] = f(x));
        // dense midpoint-rule oracle
        let n = 100_000;
        let mut dense = 0.0;
        for k in 0..n {
            let x = (k as f64 + 0.5) / n as f64;
            let cell = ((x * 20.0) as usize).min(19);
            let xi = (x - sol.mesh.cell_center(cell)) / (0.5 * sol.mesh.h);
            dense += (sol.eval_at(cell, 0, xi).unwrap() - f(x)).abs() / n as f64;
        }
        // the fixed Gauss rule integrates the kinked |error| integrand
        // approximately; magnitudes must agree
        assert!((e[0] - dense).abs() < 0.2 * dense, "{} vs {dense}", e[0]);
    }

    #[test]
    fn l1_triangle_inequality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mesh = Mesh1D::unit(6, Boundary::Periodic).unwrap();
        for _ in 0..50 {
            let mut rand_sol = || {
                let mut s = crate::solution::ModalSolution1D::zeros(mesh.clone(), 2, 1).unwrap();
                for v in s.coeffs.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                s
            };
            let u = rand_sol();
            let v = rand_sol();
            let w = rand_sol();
            let eval = |s: &crate::solution::ModalSolution1D, x: f64| {
                let cell = ((x * 6.0) as usize).min(5);
                let xi = (x - s.mesh.cell_center(cell)) / (0.5 * s.mesh.h);
                s.eval_at(cell, 0, xi).unwrap()
            };
            let d_uw = l1_error_1d(&u, |x, out| out[0] = eval(&w, x))[0];
            let d_uv = l1_error_1d(&u, |x, out| out[0] = eval(&v, x))[0];
            let d_vw = l1_error_1d(&v, |x, out| out[0] = eval(&w, x))[0];
            assert!(d_uw <= d_uv + d_vw + 1e-12);
        }
    }

    #[test]
    fn convergence_rates() {
        let rows = convergence_table(&[1.0, 0.5, 0.25], &[10, 20, 40]).unwrap();
        assert_eq!(rows[0].rate, 0.0);
        assert!((rows[1].rate - 1.0).abs() < 1e-12);
        assert!((rows[2].rate - 1.0).abs() < 1e-12);
        let cubic: Vec<f64> = [10.0_f64, 20.0, 40.0].iter().map(|n| n.powi(-3)).collect();
        let rows = convergence_table(&cubic, &[10, 20, 40]).unwrap();
        assert!((rows[1].rate - 3.0).abs() < 1e-12);
        let single = convergence_table(&[0.1], &[10]).unwrap();
        assert_eq!(single[0].rate, 0.0);
        assert!(convergence_table(&[0.0, 1.0], &[10, 20]).is_err());
        assert!(convergence_table(&[1.0, 1.0], &[20, 10]).is_err());
    }
}
