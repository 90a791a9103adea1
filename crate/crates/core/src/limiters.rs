//! Classical slope and moment limiters.
//!
//! Three families: the Minmod rebuild, its TVB variant with smoothness
//! parameter `M`, and the hierarchical moment limiter (HIO) that walks
//! modal coefficients from the highest mode down and stops at the first
//! unchanged mode. The HIO deviation doubles as the labeling oracle for
//! dataset generation.

use crate::solution::{
    eval_modes, eval_modes_2d, projection_quadrature, ModalSolution1D, ModalSolution2D,
};

/// Nodal deviations below this are floating-point noise, not changes.
pub const CHANGE_TOL: f64 = 1e-14;

/// Three-argument minmod: smallest magnitude when signs agree, else zero.
pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Moment-limiter coefficient. The admissible range for mode m is
/// [1/(2(2m-1)), 1]; the least-restrictive end leaves smooth data (where
/// each coefficient sits well inside its neighbor-difference bound)
/// untouched and makes the order-2 moment limiter coincide with Minmod.
#[inline]
fn kappa(_m: usize) -> f64 {
    1.0
}

/// Result of one limiter application.
#[derive(Debug, Clone)]
pub struct LimiterOutcome {
    /// Cells whose nodal values moved by more than [`CHANGE_TOL`]
    /// (flat `iy * n_x + ix` indices in 2D).
    pub changed_cells: Vec<usize>,
    /// Max absolute nodal change per cell, max over variables.
    pub max_deviation: Vec<f64>,
    /// Detector decisions, where the limiter separates flagging from
    /// stabilization (the NN limiter); classical limiters leave this unset.
    pub flagged_cells: Option<Vec<usize>>,
}

impl LimiterOutcome {
    fn from_deviation(max_deviation: Vec<f64>) -> Self {
        let changed_cells = max_deviation
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > CHANGE_TOL)
            .map(|(i, _)| i)
            .collect();
        Self {
            changed_cells,
            max_deviation,
            flagged_cells: None,
        }
    }

    pub fn is_changed(&self, cell: usize) -> bool {
        self.max_deviation[cell] > CHANGE_TOL
    }

    /// Flag set if the limiter reports one, otherwise the changed set.
    pub fn flag_view(&self) -> &[usize] {
        self.flagged_cells.as_deref().unwrap_or(&self.changed_cells)
    }
}

/// A cell-local limiter for 1D modal solutions.
pub trait Limiter1D {
    fn apply(&self, sol: &mut ModalSolution1D) -> LimiterOutcome;
}

/// A cell-local limiter for 2D modal solutions.
pub trait Limiter2D {
    fn apply(&self, sol: &mut ModalSolution2D) -> LimiterOutcome;
}

pub struct MinmodLimiter;
pub struct TvdLimiter {
    /// Smoothness estimate, units 1/length^2.
    pub m: f64,
}
pub struct HioLimiter;

impl Limiter1D for MinmodLimiter {
    fn apply(&self, sol: &mut ModalSolution1D) -> LimiterOutcome {
        minmod_family_1d(sol, None)
    }
}

impl Limiter1D for TvdLimiter {
    fn apply(&self, sol: &mut ModalSolution1D) -> LimiterOutcome {
        minmod_family_1d(sol, Some(self.m))
    }
}

impl Limiter1D for HioLimiter {
    fn apply(&self, sol: &mut ModalSolution1D) -> LimiterOutcome {
        apply_hio_1d(sol)
    }
}

impl Limiter2D for MinmodLimiter {
    fn apply(&self, sol: &mut ModalSolution2D) -> LimiterOutcome {
        apply_minmod_2d(sol)
    }
}

impl Limiter2D for HioLimiter {
    fn apply(&self, sol: &mut ModalSolution2D) -> LimiterOutcome {
        apply_hio_2d(sol)
    }
}

/// Max absolute nodal difference between two coefficient sets at the
/// projection quadrature nodes.
fn nodal_deviation_1d(old: &[f64], new: &[f64], nodes: &[f64]) -> f64 {
    let mut d: f64 = 0.0;
    for &xi in nodes {
        d = d.max((eval_modes(old, xi) - eval_modes(new, xi)).abs());
    }
    d
}

/// Minmod rebuild per cell and variable; `tvb_m = Some(M)` switches the
/// cell off whenever the interface excursion stays below `M h^2`.
fn minmod_family_1d(sol: &mut ModalSolution1D, tvb_m: Option<f64>) -> LimiterOutcome {
    let n = sol.mesh.n_cells;
    let nm = sol.n_modes();
    let h = sol.mesh.h;
    let quad = projection_quadrature(sol.degree);
    let snapshot = sol.clone();
    let mut deviation = vec![0.0f64; n];
    for cell in 0..n {
        for var in 0..sol.n_vars {
            let old = snapshot.cell_coeffs(cell, var);
            let avg = old[0];
            let left = eval_modes(old, -1.0);
            let right = eval_modes(old, 1.0);
            if let Some(m) = tvb_m {
                if (avg - left).abs() <= m * h * h {
                    continue;
                }
            }
            let d_plus = snapshot.ghost_average(cell as isize + 1, var) - avg;
            let d_minus = avg - snapshot.ghost_average(cell as isize - 1, var);
            // the interface excursion against the full neighbor
            // differences; a smooth cell's excursion sits inside the
            // bounds and the cell passes through untouched
            let excursion = avg - left;
            let s = minmod(excursion, d_plus, d_minus);
            if (s - excursion).abs() <= CHANGE_TOL {
                continue;
            }
            let _ = right;
            let mut rebuilt = [0.0; crate::solution::MAX_MODES_1D];
            rebuilt[0] = avg;
            rebuilt[1] = s;
            let dev = nodal_deviation_1d(old, &rebuilt[..nm], &quad.nodes);
            if dev > CHANGE_TOL {
                sol.cell_coeffs_mut(cell, var).copy_from_slice(&rebuilt[..nm]);
                deviation[cell] = deviation[cell].max(dev);
            }
        }
    }
    LimiterOutcome::from_deviation(deviation)
}

pub fn apply_minmod_1d(sol: &mut ModalSolution1D) -> LimiterOutcome {
    minmod_family_1d(sol, None)
}

pub fn apply_tvd_1d(sol: &mut ModalSolution1D, m: f64) -> LimiterOutcome {
    minmod_family_1d(sol, Some(m))
}

/// Hierarchical moment limiter: for m = p down to 1 replace `c_m` by
/// `minmod(c_m, k (c_{m-1}^{j+1} - c_{m-1}^j), k (c_{m-1}^j - c_{m-1}^{j-1}))`
/// and stop as soon as a mode comes back unchanged. Averages are never
/// touched.
pub fn apply_hio_1d(sol: &mut ModalSolution1D) -> LimiterOutcome {
    let n = sol.mesh.n_cells;
    let nm = sol.n_modes();
    let quad = projection_quadrature(sol.degree);
    let snapshot = sol.clone();
    let mut deviation = vec![0.0f64; n];
    for cell in 0..n {
        for var in 0..sol.n_vars {
            let old = snapshot.cell_coeffs(cell, var);
            let plus = snapshot.ghost_coeffs(cell as isize + 1, var);
            let minus = snapshot.ghost_coeffs(cell as isize - 1, var);
            let mut new = [0.0; crate::solution::MAX_MODES_1D];
            new[..nm].copy_from_slice(old);
            for m in (1..=sol.degree).rev() {
                let k = kappa(m);
                let r = minmod(
                    new[m],
                    k * (plus[m - 1] - old[m - 1]),
                    k * (old[m - 1] - minus[m - 1]),
                );
                if r == new[m] {
                    break;
                }
                new[m] = r;
            }
            let dev = nodal_deviation_1d(old, &new[..nm], &quad.nodes);
            if dev > CHANGE_TOL {
                sol.cell_coeffs_mut(cell, var).copy_from_slice(&new[..nm]);
                deviation[cell] = deviation[cell].max(dev);
            }
        }
    }
    LimiterOutcome::from_deviation(deviation)
}

fn nodal_deviation_2d(old: &[f64], new: &[f64], m1: usize, nodes: &[f64]) -> f64 {
    let mut d: f64 = 0.0;
    for &eta in nodes {
        for &xi in nodes {
            d = d.max((eval_modes_2d(old, m1, xi, eta) - eval_modes_2d(new, m1, xi, eta)).abs());
        }
    }
    d
}

/// Directional Minmod: the 1D procedure applied to the y-averaged moments
/// in x and the x-averaged moments in y; a triggered cell is rebuilt as
/// `{average, limited x-slope, limited y-slope}`.
pub fn apply_minmod_2d(sol: &mut ModalSolution2D) -> LimiterOutcome {
    let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
    let m1 = sol.n_modes_1d();
    let mm = sol.n_modes();
    let quad = projection_quadrature(sol.degree);
    let snapshot = sol.clone();
    let mut deviation = vec![0.0f64; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let flat = iy * nx + ix;
            for var in 0..sol.n_vars {
                let old = snapshot.cell_coeffs(ix, iy, var);
                let avg = old[0];
                // y-averaged x-profile: coefficients c_{a0}
                let profile_x: Vec<f64> = (0..m1).map(|a| old[a]).collect();
                let lx = eval_modes(&profile_x, -1.0);
                let rx = eval_modes(&profile_x, 1.0);
                let dxp = snapshot.ghost_average(ix as isize + 1, iy as isize, var) - avg;
                let dxm = avg - snapshot.ghost_average(ix as isize - 1, iy as isize, var);
                let sx = minmod(avg - lx, dxp, dxm);
                let trig_x = (sx - (avg - lx)).abs() > CHANGE_TOL;
                let _ = rx;
                // x-averaged y-profile: coefficients c_{0b}
                let profile_y: Vec<f64> = (0..m1).map(|b| old[b * m1]).collect();
                let ly = eval_modes(&profile_y, -1.0);
                let ry = eval_modes(&profile_y, 1.0);
                let dyp = snapshot.ghost_average(ix as isize, iy as isize + 1, var) - avg;
                let dym = avg - snapshot.ghost_average(ix as isize, iy as isize - 1, var);
                let sy = minmod(avg - ly, dyp, dym);
                let trig_y = (sy - (avg - ly)).abs() > CHANGE_TOL;
                let _ = ry;
                if !trig_x && !trig_y {
                    continue;
                }
                let mut new = [0.0; crate::solution::MAX_MODES_2D];
                new[0] = avg;
                new[1] = if trig_x { sx } else { old[1] };
                new[m1] = if trig_y { sy } else { old[m1] };
                let dev = nodal_deviation_2d(old, &new[..mm], m1, &quad.nodes);
                if dev > CHANGE_TOL {
                    sol.cell_coeffs_mut(ix, iy, var).copy_from_slice(&new[..mm]);
                    deviation[flat] = deviation[flat].max(dev);
                }
            }
        }
    }
    LimiterOutcome::from_deviation(deviation)
}

/// Directional moment limiter: the 1D hierarchical loop on the pure-x
/// moments with (i±1, j) neighbors and on the pure-y moments with
/// (i, j±1); cross modes stay untouched.
pub fn apply_hio_2d(sol: &mut ModalSolution2D) -> LimiterOutcome {
    let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
    let m1 = sol.n_modes_1d();
    let mm = sol.n_modes();
    let quad = projection_quadrature(sol.degree);
    let snapshot = sol.clone();
    let mut deviation = vec![0.0f64; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let flat = iy * nx + ix;
            for var in 0..sol.n_vars {
                let old = snapshot.cell_coeffs(ix, iy, var);
                let xp = snapshot.ghost_coeffs(ix as isize + 1, iy as isize, var);
                let xm = snapshot.ghost_coeffs(ix as isize - 1, iy as isize, var);
                let yp = snapshot.ghost_coeffs(ix as isize, iy as isize + 1, var);
                let ym = snapshot.ghost_coeffs(ix as isize, iy as isize - 1, var);
                let mut new = [0.0; crate::solution::MAX_MODES_2D];
                new[..mm].copy_from_slice(old);
                // x sweep on c_{a0}
                for a in (1..=sol.degree).rev() {
                    let k = kappa(a);
                    let r = minmod(
                        new[a],
                        k * (xp[a - 1] - old[a - 1]),
                        k * (old[a - 1] - xm[a - 1]),
                    );
                    if r == new[a] {
                        break;
                    }
                    new[a] = r;
                }
                // y sweep on c_{0b}
                for b in (1..=sol.degree).rev() {
                    let k = kappa(b);
                    let r = minmod(
                        new[b * m1],
                        k * (yp[(b - 1) * m1] - old[(b - 1) * m1]),
                        k * (old[(b - 1) * m1] - ym[(b - 1) * m1]),
                    );
                    if r == new[b * m1] {
                        break;
                    }
                    new[b * m1] = r;
                }
                let dev = nodal_deviation_2d(old, &new[..mm], m1, &quad.nodes);
                if dev > CHANGE_TOL {
                    sol.cell_coeffs_mut(ix, iy, var).copy_from_slice(&new[..mm]);
                    deviation[flat] = deviation[flat].max(dev);
                }
            }
        }
    }
    LimiterOutcome::from_deviation(deviation)
}
