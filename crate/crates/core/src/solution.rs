//! Modal Legendre representation of piecewise-polynomial solutions.
//!
//! Coefficients live on the classical Legendre basis over the reference
//! cell, so `coeffs[cell][var][0]` is the cell average. Supported degrees
//! are p = 1 and p = 2 (orders 2 and 3).

use crate::basis::{self, gauss_quadrature, legendre, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::{Boundary, Mesh1D, Mesh2D};

/// Coefficients per cell per variable never exceed p+1 = 3 in 1D.
pub const MAX_MODES_1D: usize = 3;
/// Tensor-product coefficient count never exceeds (p+1)^2 = 9 in 2D.
pub const MAX_MODES_2D: usize = 9;

pub(crate) fn check_degree(degree: usize) -> Result<()> {
    if degree == 1 || degree == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDegree(degree))
    }
}

/// Quadrature used for projections and error integrals: p + 2 points.
pub fn projection_quadrature(degree: usize) -> Quadrature {
    gauss_quadrature(degree + 2).expect("degree checked")
}

/// L2 projection of nodal samples taken at the rule's nodes.
///
/// Terms are accumulated over symmetric node pairs so that projecting
/// mirrored nodal data yields exactly sign-flipped coefficients.
pub(crate) fn project_nodal(vals: &[f64], quad: &Quadrature, degree: usize, out: &mut [f64]) {
    let nq = vals.len();
    for (m, c) in out.iter_mut().enumerate().take(degree + 1) {
        let term = |q: usize| quad.weights[q] * vals[q] * legendre(m, quad.nodes[q]);
        let mut acc = 0.0;
        for q in 0..nq / 2 {
            acc += term(q) + term(nq - 1 - q);
        }
        if nq % 2 == 1 {
            acc += term(nq / 2);
        }
        *c = acc / basis::mode_norm(m);
    }
}

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ModalSolution1D {
    pub mesh: Mesh1D,
    pub degree: usize,
    pub n_vars: usize,
    /// Layout: cell-major, then variable, then mode.
    pub coeffs: Vec<f64>,
    /// Per-variable reflection parity: true for velocity-like components
    /// that flip sign at reflexive walls.
    pub odd_vars: Vec<bool>,
    /// Boundary data for `Boundary::FixedToInitial`: coefficients of the
    /// left and right ghost cells, frozen at projection time.
    pub fixed_ghosts: Option<Box<(Vec<f64>, Vec<f64>)>>,
}

impl ModalSolution1D {
    pub fn zeros(mesh: Mesh1D, degree: usize, n_vars: usize) -> Result<Self> {
        check_degree(degree)?;
        let n = mesh.n_cells * n_vars * (degree + 1);
        Ok(Self {
            mesh,
            degree,
            n_vars,
            coeffs: vec![0.0; n],
            odd_vars: vec![false; n_vars],
            fixed_ghosts: None,
        })
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn offset(&self, cell: usize, var: usize) -> usize {
        (cell * self.n_vars + var) * self.n_modes()
    }

    #[inline]
    pub fn cell_coeffs(&self, cell: usize, var: usize) -> &[f64] {
        let o = self.offset(cell, var);
        &self.coeffs[o..o + self.n_modes()]
    }

    #[inline]
    pub fn cell_coeffs_mut(&mut self, cell: usize, var: usize) -> &mut [f64] {
        let o = self.offset(cell, var);
        let m = self.n_modes();
        &mut self.coeffs[o..o + m]
    }

    #[inline]
    pub fn average(&self, cell: usize, var: usize) -> f64 {
        self.coeffs[self.offset(cell, var)]
    }

    fn check_indices(&self, cell: usize, var: usize) -> Result<()> {
        if cell >= self.mesh.n_cells {
            return Err(Error::IndexOutOfRange {
                what: "cell",
                index: cell,
                limit: self.mesh.n_cells,
            });
        }
        if var >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                what: "var",
                index: var,
                limit: self.n_vars,
            });
        }
        Ok(())
    }

    /// Evaluate the modal expansion at reference coordinate `xi`.
    pub fn eval_at(&self, cell: usize, var: usize, xi: f64) -> Result<f64> {
        self.check_indices(cell, var)?;
        Ok(eval_modes(self.cell_coeffs(cell, var), xi))
    }

    /// Ghost-aware coefficient lookup; `cell` may be -1 or n_cells.
    pub fn ghost_coeffs(&self, cell: isize, var: usize) -> [f64; MAX_MODES_1D] {
        let n = self.mesh.n_cells as isize;
        let m = self.n_modes();
        let mut out = [0.0; MAX_MODES_1D];
        if (0..n).contains(&cell) {
            out[..m].copy_from_slice(self.cell_coeffs(cell as usize, var));
            return out;
        }
        match self.mesh.boundary {
            Boundary::Periodic => {
                let c = cell.rem_euclid(n) as usize;
                out[..m].copy_from_slice(self.cell_coeffs(c, var));
            }
            Boundary::GradientFree => {
                let c = cell.clamp(0, n - 1) as usize;
                out[..m].copy_from_slice(self.cell_coeffs(c, var));
            }
            Boundary::Reflexive => {
                let c = if cell < 0 { 0 } else { n as usize - 1 };
                let src = self.cell_coeffs(c, var);
                let flip = if self.odd_vars[var] { -1.0 } else { 1.0 };
                for (k, o) in out.iter_mut().enumerate().take(m) {
                    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *o = flip * parity * src[k];
                }
            }
            Boundary::FixedToInitial => {
                let ghosts = self
                    .fixed_ghosts
                    .as_ref()
                    .expect("fixed_to_initial solution lacks frozen ghosts");
                let side = if cell < 0 { &ghosts.0 } else { &ghosts.1 };
                out[..m].copy_from_slice(&side[var * m..var * m + m]);
            }
        }
        out
    }

    /// Evaluate through ghosts; used by fluxes and feature stencils.
    pub fn ghost_eval(&self, cell: isize, var: usize, xi: f64) -> f64 {
        let c = self.ghost_coeffs(cell, var);
        eval_modes(&c[..self.n_modes()], xi)
    }

    pub fn ghost_average(&self, cell: isize, var: usize) -> f64 {
        self.ghost_coeffs(cell, var)[0]
    }

    /// Freeze the current boundary cells as fixed ghost data.
    pub fn freeze_boundary_ghosts(&mut self) {
        let m = self.n_modes();
        let mut left = Vec::with_capacity(self.n_vars * m);
        let mut right = Vec::with_capacity(self.n_vars * m);
        for var in 0..self.n_vars {
            left.extend_from_slice(self.cell_coeffs(0, var));
        }
        for var in 0..self.n_vars {
            right.extend_from_slice(self.cell_coeffs(self.mesh.n_cells - 1, var));
        }
        self.fixed_ghosts = Some(Box::new((left, right)));
    }
}

#[inline]
pub(crate) fn eval_modes(coeffs: &[f64], xi: f64) -> f64 {
    let mut v = 0.0;
    for (m, &c) in coeffs.iter().enumerate() {
        v += c * legendre(m, xi);
    }
    v
}

/// L2-project a (possibly vector-valued) field onto the modal basis.
///
/// `f(x, vals)` writes the field components at physical coordinate `x`.
pub fn project_ic_1d(
    mesh: &Mesh1D,
    degree: usize,
    n_vars: usize,
    mut f: impl FnMut(f64, &mut [f64]),
) -> Result<ModalSolution1D> {
    let mut sol = ModalSolution1D::zeros(mesh.clone(), degree, n_vars)?;
    let quad = projection_quadrature(degree);
    let nq = quad.len();
    let mut vals = vec![0.0; nq * n_vars];
    let mut buf = vec![0.0; n_vars];
    for cell in 0..mesh.n_cells {
        for (q, &xi) in quad.nodes.iter().enumerate() {
            let x = mesh.to_physical(cell, xi);
            f(x, &mut buf);
            for var in 0..n_vars {
                vals[var * nq + q] = buf[var];
            }
        }
        for var in 0..n_vars {
            project_nodal(
                &vals[var * nq..(var + 1) * nq],
                &quad,
                degree,
                sol.cell_coeffs_mut(cell, var),
            );
        }
    }
    if mesh.boundary == Boundary::FixedToInitial {
        sol.freeze_boundary_ghosts();
    }
    Ok(sol)
}

/// Scalar convenience wrapper around [`project_ic_1d`].
pub fn project_scalar_1d(
    mesh: &Mesh1D,
    degree: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<ModalSolution1D> {
    project_ic_1d(mesh, degree, 1, move |x, out| out[0] = f(x))
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

/// Frozen boundary strips for `FixedToInitial` in 2D.
#[derive(Debug, Clone)]
pub struct FixedGhosts2D {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ModalSolution2D {
    pub mesh: Mesh2D,
    pub degree: usize,
    pub n_vars: usize,
    /// Layout: cell-major (iy * n_x + ix), then variable, then mode
    /// `b * (p+1) + a` for the tensor basis `P_a(xi) P_b(eta)`.
    pub coeffs: Vec<f64>,
    pub fixed_ghosts: Option<Box<FixedGhosts2D>>,
}

impl ModalSolution2D {
    pub fn zeros(mesh: Mesh2D, degree: usize, n_vars: usize) -> Result<Self> {
        check_degree(degree)?;
        let m = (degree + 1) * (degree + 1);
        let n = mesh.n_cells() * n_vars * m;
        Ok(Self {
            mesh,
            degree,
            n_vars,
            coeffs: vec![0.0; n],
            fixed_ghosts: None,
        })
    }

    #[inline]
    pub fn n_modes_1d(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    #[inline]
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.mesh.n_x + ix
    }

    #[inline]
    pub fn offset(&self, ix: usize, iy: usize, var: usize) -> usize {
        (self.cell_index(ix, iy) * self.n_vars + var) * self.n_modes()
    }

    #[inline]
    pub fn cell_coeffs(&self, ix: usize, iy: usize, var: usize) -> &[f64] {
        let o = self.offset(ix, iy, var);
        &self.coeffs[o..o + self.n_modes()]
    }

    #[inline]
    pub fn cell_coeffs_mut(&mut self, ix: usize, iy: usize, var: usize) -> &mut [f64] {
        let o = self.offset(ix, iy, var);
        let m = self.n_modes();
        &mut self.coeffs[o..o + m]
    }

    #[inline]
    pub fn average(&self, ix: usize, iy: usize, var: usize) -> f64 {
        self.coeffs[self.offset(ix, iy, var)]
    }

    pub fn eval_at(&self, ix: usize, iy: usize, var: usize, xi: f64, eta: f64) -> Result<f64> {
        if ix >= self.mesh.n_x || iy >= self.mesh.n_y {
            return Err(Error::IndexOutOfRange {
                what: "cell",
                index: self.cell_index(ix.min(self.mesh.n_x - 1), iy),
                limit: self.mesh.n_cells(),
            });
        }
        if var >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                what: "var",
                index: var,
                limit: self.n_vars,
            });
        }
        Ok(eval_modes_2d(
            self.cell_coeffs(ix, iy, var),
            self.n_modes_1d(),
            xi,
            eta,
        ))
    }

    /// Ghost-aware coefficient lookup along one face-neighbor step.
    pub fn ghost_coeffs(&self, ix: isize, iy: isize, var: usize) -> [f64; MAX_MODES_2D] {
        let (nx, ny) = (self.mesh.n_x as isize, self.mesh.n_y as isize);
        let m1 = self.n_modes_1d();
        let mm = self.n_modes();
        let mut out = [0.0; MAX_MODES_2D];
        if (0..nx).contains(&ix) && (0..ny).contains(&iy) {
            out[..mm].copy_from_slice(self.cell_coeffs(ix as usize, iy as usize, var));
            return out;
        }
        match self.mesh.boundary {
            Boundary::Periodic => {
                let cx = ix.rem_euclid(nx) as usize;
                let cy = iy.rem_euclid(ny) as usize;
                out[..mm].copy_from_slice(self.cell_coeffs(cx, cy, var));
            }
            Boundary::GradientFree => {
                let cx = ix.clamp(0, nx - 1) as usize;
                let cy = iy.clamp(0, ny - 1) as usize;
                out[..mm].copy_from_slice(self.cell_coeffs(cx, cy, var));
            }
            Boundary::Reflexive => {
                // mirror across the violated axis; scalar fields only
                let flip_x = ix < 0 || ix >= nx;
                let flip_y = iy < 0 || iy >= ny;
                let cx = ix.clamp(0, nx - 1) as usize;
                let cy = iy.clamp(0, ny - 1) as usize;
                let src = self.cell_coeffs(cx, cy, var);
                for b in 0..m1 {
                    for a in 0..m1 {
                        let mut v = src[b * m1 + a];
                        if flip_x && a % 2 == 1 {
                            v = -v;
                        }
                        if flip_y && b % 2 == 1 {
                            v = -v;
                        }
                        out[b * m1 + a] = v;
                    }
                }
            }
            Boundary::FixedToInitial => {
                let g = self
                    .fixed_ghosts
                    .as_ref()
                    .expect("fixed_to_initial solution lacks frozen ghosts");
                let (strip, along) = if ix < 0 {
                    (&g.left, iy.clamp(0, ny - 1) as usize)
                } else if ix >= nx {
                    (&g.right, iy.clamp(0, ny - 1) as usize)
                } else if iy < 0 {
                    (&g.bottom, ix.clamp(0, nx - 1) as usize)
                } else {
                    (&g.top, ix.clamp(0, nx - 1) as usize)
                };
                let o = (along * self.n_vars + var) * mm;
                out[..mm].copy_from_slice(&strip[o..o + mm]);
            }
        }
        out
    }

    pub fn ghost_eval(&self, ix: isize, iy: isize, var: usize, xi: f64, eta: f64) -> f64 {
        let c = self.ghost_coeffs(ix, iy, var);
        eval_modes_2d(&c[..self.n_modes()], self.n_modes_1d(), xi, eta)
    }

    pub fn ghost_average(&self, ix: isize, iy: isize, var: usize) -> f64 {
        self.ghost_coeffs(ix, iy, var)[0]
    }

    pub fn freeze_boundary_ghosts(&mut self) {
        let mm = self.n_modes();
        let grab = |cells: Vec<(usize, usize)>| {
            let mut v = Vec::with_capacity(cells.len() * self.n_vars * mm);
            for (ix, iy) in cells {
                for var in 0..self.n_vars {
                    v.extend_from_slice(self.cell_coeffs(ix, iy, var));
                }
            }
            v
        };
        let g = FixedGhosts2D {
            left: grab((0..self.mesh.n_y).map(|iy| (0, iy)).collect()),
            right: grab((0..self.mesh.n_y).map(|iy| (self.mesh.n_x - 1, iy)).collect()),
            bottom: grab((0..self.mesh.n_x).map(|ix| (ix, 0)).collect()),
            top: grab((0..self.mesh.n_x).map(|ix| (ix, self.mesh.n_y - 1)).collect()),
        };
        self.fixed_ghosts = Some(Box::new(g));
    }
}

#[inline]
pub(crate) fn eval_modes_2d(coeffs: &[f64], m1: usize, xi: f64, eta: f64) -> f64 {
    let mut v = 0.0;
    for b in 0..m1 {
        let pb = legendre(b, eta);
        for a in 0..m1 {
            v += coeffs[b * m1 + a] * legendre(a, xi) * pb;
        }
    }
    v
}

/// L2 projection onto the tensor-product basis; scalar fields.
pub fn project_scalar_2d(
    mesh: &Mesh2D,
    degree: usize,
    mut f: impl FnMut(f64, f64) -> f64,
) -> Result<ModalSolution2D> {
    let mut sol = ModalSolution2D::zeros(mesh.clone(), degree, 1)?;
    let quad = projection_quadrature(degree);
    let nq = quad.len();
    let m1 = degree + 1;
    let mut vals = vec![0.0; nq * nq];
    for iy in 0..mesh.n_y {
        for ix in 0..mesh.n_x {
            for (qe, &eta) in quad.nodes.iter().enumerate() {
                for (qx, &xi) in quad.nodes.iter().enumerate() {
                    let (x, y) = mesh.to_physical(ix, iy, xi, eta);
                    vals[qe * nq + qx] = f(x, y);
                }
            }
            let coeffs = sol.cell_coeffs_mut(ix, iy, 0);
            for b in 0..m1 {
                for a in 0..m1 {
                    let mut acc = 0.0;
                    for qe in 0..nq {
                        let pb = legendre(b, quad.nodes[qe]);
                        for qx in 0..nq {
                            acc += quad.weights[qe]
                                * quad.weights[qx]
                                * vals[qe * nq + qx]
                                * legendre(a, quad.nodes[qx])
                                * pb;
                        }
                    }
                    coeffs[b * m1 + a] = acc / (basis::mode_norm(a) * basis::mode_norm(b));
                }
            }
        }
    }
    if mesh.boundary == Boundary::FixedToInitial {
        sol.freeze_boundary_ghosts();
    }
    Ok(sol)
}
