//! Semi-discrete DG residuals: weak form with upwind (advection) and
//! Rusanov (Euler) interface fluxes.

use crate::basis::{legendre, legendre_deriv, mode_norm, Quadrature};
use crate::error::Result;
use crate::euler::{cons_to_prim, euler_flux, EulerParams};
use crate::solution::{projection_quadrature, ModalSolution1D, ModalSolution2D};

/// Precomputed basis tables at the volume quadrature nodes.
pub struct DgTables {
    pub quad: Quadrature,
    /// `phi[m][q] = P_m(xi_q)`
    pub phi: Vec<Vec<f64>>,
    /// `dphi[m][q] = P_m'(xi_q)`
    pub dphi: Vec<Vec<f64>>,
    /// `(2m+1)/2`
    pub inv_norm: Vec<f64>,
}

impl DgTables {
    pub fn new(degree: usize) -> Self {
        let quad = projection_quadrature(degree);
        let n_modes = degree + 1;
        let phi = (0..n_modes)
            .map(|m| quad.nodes.iter().map(|&x| legendre(m, x)).collect())
            .collect();
        let dphi = (0..n_modes)
            .map(|m| quad.nodes.iter().map(|&x| legendre_deriv(m, x)).collect())
            .collect();
        let inv_norm = (0..n_modes).map(|m| 1.0 / mode_norm(m)).collect();
        Self {
            quad,
            phi,
            dphi,
            inv_norm,
        }
    }
}

/// d/dt coefficients for 1D linear advection with upwind interface flux.
pub fn rhs_advection_1d(sol: &ModalSolution1D, a: f64, tables: &DgTables, out: &mut [f64]) {
    debug_assert_eq!(sol.n_vars, 1);
    let n = sol.mesh.n_cells;
    let nm = sol.n_modes();
    let h = sol.mesh.h;
    let nq = tables.quad.len();

    // upwind interface values: flux at interface i+1/2 for i in -1..n-1
    // stored as flux[i] = numerical flux at the LEFT face of cell i
    let mut face_flux = vec![0.0; n + 1];
    for (i, f) in face_flux.iter_mut().enumerate() {
        // interface between cell i-1 and cell i
        let left = i as isize - 1;
        let right = i as isize;
        let u = if a >= 0.0 {
            sol.ghost_eval(left, 0, 1.0)
        } else {
            sol.ghost_eval(right, 0, -1.0)
        };
        *f = a * u;
    }

    for cell in 0..n {
        let coeffs = sol.cell_coeffs(cell, 0);
        let fl = face_flux[cell];
        let fr = face_flux[cell + 1];
        for m in 0..nm {
            let mut vol = 0.0;
            for q in 0..nq {
                let u = eval_at_tables(coeffs, tables, q);
                vol += tables.quad.weights[q] * a * u * tables.dphi[m][q];
            }
            let pm1 = if m % 2 == 0 { 1.0 } else { -1.0 }; // P_m(-1)
            let surf = fr - fl * pm1; // P_m(1) = 1
            out[cell * nm + m] = (2.0 * tables.inv_norm[m] / h) * (vol - surf);
        }
    }
}

#[inline]
fn eval_at_tables(coeffs: &[f64], tables: &DgTables, q: usize) -> f64 {
    let mut v = 0.0;
    for (m, &c) in coeffs.iter().enumerate() {
        v += c * tables.phi[m][q];
    }
    v
}

/// Rusanov (local Lax-Friedrichs) flux from two conserved states.
pub fn rusanov_flux(
    left: [f64; 3],
    right: [f64; 3],
    gas: EulerParams,
    cell_hint: usize,
) -> Result<[f64; 3]> {
    let pl = cons_to_prim(left, gas, cell_hint)?;
    let pr = cons_to_prim(right, gas, cell_hint)?;
    let fl = euler_flux(pl, gas);
    let fr = euler_flux(pr, gas);
    let sl = pl[1].abs() + gas.sound_speed(pl[0], pl[2]);
    let sr = pr[1].abs() + gas.sound_speed(pr[0], pr[2]);
    let s = sl.max(sr);
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * s * (right[k] - left[k]);
    }
    Ok(out)
}

/// d/dt coefficients for the 1D Euler system. Errors on nonpositive
/// density or pressure at any evaluation point.
pub fn rhs_euler_1d(
    sol: &ModalSolution1D,
    gas: EulerParams,
    tables: &DgTables,
    out: &mut [f64],
) -> Result<()> {
    debug_assert_eq!(sol.n_vars, 3);
    let n = sol.mesh.n_cells;
    let nm = sol.n_modes();
    let h = sol.mesh.h;
    let nq = tables.quad.len();

    let trace = |cell: isize, xi: f64| -> [f64; 3] {
        [
            sol.ghost_eval(cell, 0, xi),
            sol.ghost_eval(cell, 1, xi),
            sol.ghost_eval(cell, 2, xi),
        ]
    };

    let mut face_flux = vec![[0.0; 3]; n + 1];
    for (i, f) in face_flux.iter_mut().enumerate() {
        let left = trace(i as isize - 1, 1.0);
        let right = trace(i as isize, -1.0);
        *f = rusanov_flux(left, right, gas, i.min(n - 1))?;
    }

    // physical flux at volume quadrature points
    let mut flux_q = vec![[0.0; 3]; nq];
    for cell in 0..n {
        for (q, fq) in flux_q.iter_mut().enumerate() {
            let state = [
                eval_at_tables(sol.cell_coeffs(cell, 0), tables, q),
                eval_at_tables(sol.cell_coeffs(cell, 1), tables, q),
                eval_at_tables(sol.cell_coeffs(cell, 2), tables, q),
            ];
            let prim = cons_to_prim(state, gas, cell)?;
            *fq = euler_flux(prim, gas);
        }
        for var in 0..3 {
            let fl = face_flux[cell][var];
            let fr = face_flux[cell + 1][var];
            for m in 0..nm {
                let mut vol = 0.0;
                for (q, fq) in flux_q.iter().enumerate() {
                    vol += tables.quad.weights[q] * fq[var] * tables.dphi[m][q];
                }
                let pm1 = if m % 2 == 0 { 1.0 } else { -1.0 };
                let surf = fr - fl * pm1;
                out[(cell * 3 + var) * nm + m] = (2.0 * tables.inv_norm[m] / h) * (vol - surf);
            }
        }
    }
    Ok(())
}

/// Max wave speed |v| + c over all volume quadrature points.
pub fn euler_max_speed(sol: &ModalSolution1D, gas: EulerParams, tables: &DgTables) -> Result<f64> {
    let mut s: f64 = 0.0;
    for cell in 0..sol.mesh.n_cells {
        for q in 0..tables.quad.len() {
            let state = [
                eval_at_tables(sol.cell_coeffs(cell, 0), tables, q),
                eval_at_tables(sol.cell_coeffs(cell, 1), tables, q),
                eval_at_tables(sol.cell_coeffs(cell, 2), tables, q),
            ];
            let prim = cons_to_prim(state, gas, cell)?;
            s = s.max(prim[1].abs() + gas.sound_speed(prim[0], prim[2]));
        }
    }
    Ok(s)
}

/// d/dt coefficients for 2D linear advection, dimension-by-dimension
/// upwind fluxes on the tensor basis.
pub fn rhs_advection_2d(sol: &ModalSolution2D, a: [f64; 2], tables: &DgTables, out: &mut [f64]) {
    debug_assert_eq!(sol.n_vars, 1);
    let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
    let (dx, dy) = (sol.mesh.dx, sol.mesh.dy);
    let m1 = sol.n_modes_1d();
    let mm = sol.n_modes();
    let nq = tables.quad.len();

    // face trace values at the quadrature nodes along each face
    let x_trace = |ix: isize, iy: isize, xi: f64, q: usize| -> f64 {
        let c = sol.ghost_coeffs(ix, iy, 0);
        let mut v = 0.0;
        for b in 0..m1 {
            for aa in 0..m1 {
                v += c[b * m1 + aa] * legendre(aa, xi) * tables.phi[b][q];
            }
        }
        v
    };
    let y_trace = |ix: isize, iy: isize, eta: f64, q: usize| -> f64 {
        let c = sol.ghost_coeffs(ix, iy, 0);
        let mut v = 0.0;
        for b in 0..m1 {
            for aa in 0..m1 {
                v += c[b * m1 + aa] * tables.phi[aa][q] * legendre(b, eta)
            }
        }
        v
    };

    for iy in 0..ny {
        for ix in 0..nx {
            let coeffs = sol.cell_coeffs(ix, iy, 0);
            let cell = iy * nx + ix;

            // volume integrals
            let mut vol = vec![0.0; mm];
            for qe in 0..nq {
                for qx in 0..nq {
                    let mut u = 0.0;
                    for b in 0..m1 {
                        for aa in 0..m1 {
                            u += coeffs[b * m1 + aa] * tables.phi[aa][qx] * tables.phi[b][qe];
                        }
                    }
                    let w = tables.quad.weights[qx] * tables.quad.weights[qe];
                    for b in 0..m1 {
                        for aa in 0..m1 {
                            vol[b * m1 + aa] += w
                                * u
                                * (dy * 0.5 * a[0] * tables.dphi[aa][qx] * tables.phi[b][qe]
                                    + dx * 0.5 * a[1] * tables.phi[aa][qx] * tables.dphi[b][qe]);
                        }
                    }
                }
            }

            // x faces: upwind states along the face quadrature
            let mut surf = vec![0.0; mm];
            for q in 0..nq {
                let w = tables.quad.weights[q];
                // right face (xi = 1)
                let u_r = if a[0] >= 0.0 {
                    x_trace(ix as isize, iy as isize, 1.0, q)
                } else {
                    x_trace(ix as isize + 1, iy as isize, -1.0, q)
                };
                // left face (xi = -1)
                let u_l = if a[0] >= 0.0 {
                    x_trace(ix as isize - 1, iy as isize, 1.0, q)
                } else {
                    x_trace(ix as isize, iy as isize, -1.0, q)
                };
                // top face (eta = 1)
                let u_t = if a[1] >= 0.0 {
                    y_trace(ix as isize, iy as isize, 1.0, q)
                } else {
                    y_trace(ix as isize, iy as isize + 1, -1.0, q)
                };
                // bottom face (eta = -1)
                let u_b = if a[1] >= 0.0 {
                    y_trace(ix as isize, iy as isize - 1, 1.0, q)
                } else {
                    y_trace(ix as isize, iy as isize, -1.0, q)
                };
                for b in 0..m1 {
                    for aa in 0..m1 {
                        let pa_p = 1.0; // P_a(1)
                        let pa_m = if aa % 2 == 0 { 1.0 } else { -1.0 };
                        let pb_p = 1.0;
                        let pb_m = if b % 2 == 0 { 1.0 } else { -1.0 };
                        surf[b * m1 + aa] += w
                            * (dy * 0.5 * a[0] * (u_r * pa_p - u_l * pa_m) * tables.phi[b][q]
                                + dx * 0.5 * a[1] * (u_t * pb_p - u_b * pb_m) * tables.phi[aa][q]);
                    }
                }
            }

            for b in 0..m1 {
                for aa in 0..m1 {
                    let scale = 4.0 * tables.inv_norm[aa] * tables.inv_norm[b] / (dx * dy);
                    out[cell * mm + b * m1 + aa] = scale * (vol[b * m1 + aa] - surf[b * m1 + aa]);
                }
            }
        }
    }
}
