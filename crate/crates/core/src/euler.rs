//! Ideal-gas Euler variable conversions.

use crate::error::{Error, Result};
use crate::solution::{project_nodal, projection_quadrature, ModalSolution1D};

/// Ideal-gas parameters; `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub gamma: f64,
}

impl EulerParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidArgument(format!("gamma = {gamma} must be > 1")))
        }
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

impl Default for EulerParams {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

/// (rho, rho v, E) -> (rho, v, p). Fails on nonpositive density or pressure.
pub fn cons_to_prim(state: [f64; 3], gas: EulerParams, cell: usize) -> Result<[f64; 3]> {
    let [rho, mom, energy] = state;
    if rho <= 0.0 {
        return Err(Error::Positivity {
            cell,
            what: "density",
            value: rho,
        });
    }
    let v = mom / rho;
    let p = (gas.gamma - 1.0) * (energy - 0.5 * rho * v * v);
    if p <= 0.0 {
        return Err(Error::Positivity {
            cell,
            what: "pressure",
            value: p,
        });
    }
    Ok([rho, v, p])
}

/// (rho, v, p) -> (rho, rho v, E).
pub fn prim_to_cons(state: [f64; 3], gas: EulerParams) -> [f64; 3] {
    let [rho, v, p] = state;
    [rho, rho * v, p / (gas.gamma - 1.0) + 0.5 * rho * v * v]
}

/// Physical flux of the 1D Euler system at a primitive state.
pub fn euler_flux(prim: [f64; 3], gas: EulerParams) -> [f64; 3] {
    let [rho, v, p] = prim;
    let energy = p / (gas.gamma - 1.0) + 0.5 * rho * v * v;
    [rho * v, rho * v * v + p, (energy + p) * v]
}

/// Convert a conserved modal solution to primitive variables by nodal
/// evaluation at the projection quadrature followed by reprojection.
pub fn solution_to_primitive(sol: &ModalSolution1D, gas: EulerParams) -> Result<ModalSolution1D> {
    debug_assert_eq!(sol.n_vars, 3);
    let mut prim = sol.clone();
    prim.odd_vars = vec![false, true, false];
    let quad = projection_quadrature(sol.degree);
    let nq = quad.len();
    let mut nodal = vec![0.0; 3 * nq];
    for cell in 0..sol.mesh.n_cells {
        for (q, &xi) in quad.nodes.iter().enumerate() {
            let state = [
                sol.eval_at(cell, 0, xi)?,
                sol.eval_at(cell, 1, xi)?,
                sol.eval_at(cell, 2, xi)?,
            ];
            let p = cons_to_prim(state, gas, cell)?;
            for var in 0..3 {
                nodal[var * nq + q] = p[var];
            }
        }
        for var in 0..3 {
            project_nodal(
                &nodal[var * nq..(var + 1) * nq],
                &quad,
                sol.degree,
                prim.cell_coeffs_mut(cell, var),
            );
        }
    }
    if let Some(g) = prim.fixed_ghosts.as_mut() {
        convert_ghost_strip(&mut g.0, sol.degree, &quad, gas)?;
        convert_ghost_strip(&mut g.1, sol.degree, &quad, gas)?;
    }
    Ok(prim)
}

fn convert_ghost_strip(
    strip: &mut [f64],
    degree: usize,
    quad: &crate::basis::Quadrature,
    gas: EulerParams,
) -> Result<()> {
    let m = degree + 1;
    let nq = quad.len();
    let mut nodal = vec![0.0; 3 * nq];
    for (q, &xi) in quad.nodes.iter().enumerate() {
        let state = [
            crate::solution::eval_modes(&strip[0..m], xi),
            crate::solution::eval_modes(&strip[m..2 * m], xi),
            crate::solution::eval_modes(&strip[2 * m..3 * m], xi),
        ];
        let p = cons_to_prim(state, gas, usize::MAX)?;
        for var in 0..3 {
            nodal[var * nq + q] = p[var];
        }
    }
    for var in 0..3 {
        let mut out = [0.0; 3];
        project_nodal(&nodal[var * nq..(var + 1) * nq], quad, degree, &mut out[..m]);
        strip[var * m..(var + 1) * m].copy_from_slice(&out[..m]);
    }
    Ok(())
}

/// Write limited primitive coefficients of one cell back into the conserved
/// solution, preserving the conserved cell averages bitwise.
pub fn primitive_cell_to_conserved(
    prim: &ModalSolution1D,
    cell: usize,
    gas: EulerParams,
    cons: &mut ModalSolution1D,
) -> Result<()> {
    let quad = projection_quadrature(prim.degree);
    let nq = quad.len();
    let mut nodal = vec![0.0; 3 * nq];
    for (q, &xi) in quad.nodes.iter().enumerate() {
        let p = [
            prim.eval_at(cell, 0, xi)?,
            prim.eval_at(cell, 1, xi)?,
            prim.eval_at(cell, 2, xi)?,
        ];
        let c = prim_to_cons(p, gas);
        for var in 0..3 {
            nodal[var * nq + q] = c[var];
        }
    }
    for var in 0..3 {
        let avg = cons.average(cell, var);
        project_nodal(
            &nodal[var * nq..(var + 1) * nq],
            &quad,
            prim.degree,
            cons.cell_coeffs_mut(cell, var),
        );
        // conservation: the limiter never touches cell averages
        cons.cell_coeffs_mut(cell, var)[0] = avg;
    }
    Ok(())
}
