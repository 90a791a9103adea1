//! A trained network run as a black-box limiter.
//!
//! Flags come from a majority vote over symmetry-transformed copies of the
//! feature vector (ties flag), flagged cells fall back to the Minmod
//! rebuild, and cell averages are never touched.

use crate::error::{Error, Result};
use crate::features::{extract_features_1d, extract_features_2d, FeatureVector, SchemaId};
use crate::limiters::{minmod, Limiter1D, Limiter2D, LimiterOutcome, CHANGE_TOL};
use crate::mlp::Network;
use crate::solution::{eval_modes, eval_modes_2d, projection_quadrature, ModalSolution1D, ModalSolution2D};

/// A feature-index permutation with per-entry sign flips:
/// `out[k] = sign[k] * in[perm[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTransform {
    pub perm: Vec<usize>,
    pub sign: Vec<f64>,
}

impl FeatureTransform {
    pub fn identity(d: usize) -> Self {
        Self {
            perm: (0..d).collect(),
            sign: vec![1.0; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.sign)
            .map(|(&p, &s)| s * x[p])
            .collect()
    }

    /// Composition: apply `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.perm.len();
        let mut perm = vec![0; d];
        let mut sign = vec![1.0; d];
        for k in 0..d {
            perm[k] = other.perm[self.perm[k]];
            sign[k] = self.sign[k] * other.sign[self.perm[k]];
        }
        Self { perm, sign }
    }
}

/// A set of feature transforms; the identity is always element 0.
#[derive(Debug, Clone)]
pub struct InvarianceGroup {
    pub transforms: Vec<FeatureTransform>,
}

impl InvarianceGroup {
    pub fn identity_only(d: usize) -> Self {
        Self {
            transforms: vec![FeatureTransform::identity(d)],
        }
    }
}

fn swap(t: &mut FeatureTransform, a: usize, b: usize) {
    t.perm[a] = b;
    t.perm[b] = a;
}

/// Reflection through the cell center for the 11-entry 1D schema.
pub fn mirror_transform_1d() -> FeatureTransform {
    let mut t = FeatureTransform::identity(11);
    swap(&mut t, 2, 3); // neighbor averages
    swap(&mut t, 4, 5); // inside traces
    swap(&mut t, 6, 7); // outside traces
    swap(&mut t, 8, 9); // forward/backward differences
    t.sign[8] = -1.0;
    t.sign[9] = -1.0;
    t.sign[10] = -1.0; // centered difference
    t
}

/// `{identity, mirror}` for the 1D schema.
pub fn mirror_map_1d() -> InvarianceGroup {
    InvarianceGroup {
        transforms: vec![FeatureTransform::identity(11), mirror_transform_1d()],
    }
}

/// x-reflection for the 23-entry 2D schema.
pub fn mirror_transform_2d_x() -> FeatureTransform {
    let mut t = FeatureTransform::identity(23);
    swap(&mut t, 3, 4); // x-neighbor averages
    swap(&mut t, 7, 8); // inside x traces
    swap(&mut t, 9, 10); // outside x traces
    swap(&mut t, 15, 16); // x differences
    t.sign[15] = -1.0;
    t.sign[16] = -1.0;
    t.sign[17] = -1.0; // centered x difference
    t
}

/// y-reflection for the 23-entry 2D schema.
pub fn mirror_transform_2d_y() -> FeatureTransform {
    let mut t = FeatureTransform::identity(23);
    swap(&mut t, 5, 6); // y-neighbor averages
    swap(&mut t, 11, 12); // inside y traces
    swap(&mut t, 13, 14); // outside y traces
    swap(&mut t, 18, 19); // y differences
    t.sign[18] = -1.0;
    t.sign[19] = -1.0;
    t.sign[20] = -1.0; // centered y difference
    t
}

/// The four mirror symmetries of the 2D schema. Quarter-turn rotations are
/// excluded: dx and dy occupy distinct slots, so axis swaps are not schema
/// automorphisms.
pub fn symmetry_group_2d() -> InvarianceGroup {
    let x = mirror_transform_2d_x();
    let y = mirror_transform_2d_y();
    let xy = x.compose(&y);
    InvarianceGroup {
        transforms: vec![FeatureTransform::identity(23), x, y, xy],
    }
}

/// Majority label over all transformed copies; ties flag.
pub fn predict_invariant(
    net: &Network,
    x: &FeatureVector,
    group: &InvarianceGroup,
    tau: f64,
) -> Result<u8> {
    let mut votes = 0usize;
    for t in &group.transforms {
        let transformed = t.apply(&x.values);
        votes += net.predict(&transformed, tau)? as usize;
    }
    Ok((2 * votes >= group.transforms.len()) as u8)
}

/// Minmod rebuild of one cell if the limited interface values move; the
/// same procedure the Minmod limiter applies to every cell.
fn minmod_rebuild_cell_1d(
    sol: &mut ModalSolution1D,
    snapshot: &ModalSolution1D,
    cell: usize,
    var: usize,
    nodes: &[f64],
) -> f64 {
    let nm = sol.n_modes();
    let old = snapshot.cell_coeffs(cell, var);
    let avg = old[0];
    let left = eval_modes(old, -1.0);
    let right = eval_modes(old, 1.0);
    let d_plus = snapshot.ghost_average(cell as isize + 1, var) - avg;
    let d_minus = avg - snapshot.ghost_average(cell as isize - 1, var);
    let excursion = avg - left;
    let s = minmod(excursion, d_plus, d_minus);
    if (s - excursion).abs() <= CHANGE_TOL {
        return 0.0;
    }
    let _ = right;
    let mut rebuilt = [0.0; crate::solution::MAX_MODES_1D];
    rebuilt[0] = avg;
    rebuilt[1] = s;
    let mut dev: f64 = 0.0;
    for &xi in nodes {
        dev = dev.max((eval_modes(old, xi) - eval_modes(&rebuilt[..nm], xi)).abs());
    }
    sol.cell_coeffs_mut(cell, var).copy_from_slice(&rebuilt[..nm]);
    dev
}

/// NN limiter for 1D solutions; for systems a cell is flagged when any
/// variable votes positive, and every variable of a flagged cell is then
/// stabilized.
pub struct NnLimiter1D {
    pub net: Network,
    pub group: InvarianceGroup,
    pub tau: f64,
}

impl NnLimiter1D {
    pub fn from_network(net: Network) -> Result<Self> {
        if net.schema != SchemaId::F1dV1 || net.input_dim != 11 {
            return Err(Error::SchemaMismatch {
                expected: SchemaId::F1dV1.name().into(),
                got: format!("{} (d={})", net.schema.name(), net.input_dim),
            });
        }
        Ok(Self {
            net,
            group: mirror_map_1d(),
            tau: 0.5,
        })
    }

    /// Flag decision per cell without modifying the solution.
    pub fn flags(&self, sol: &ModalSolution1D) -> Result<Vec<bool>> {
        let mut flags = vec![false; sol.mesh.n_cells];
        for (cell, f) in flags.iter_mut().enumerate() {
            for var in 0..sol.n_vars {
                let x = extract_features_1d(sol, cell, var)?;
                if predict_invariant(&self.net, &x, &self.group, self.tau)? == 1 {
                    *f = true;
                    break;
                }
            }
        }
        Ok(flags)
    }

    pub fn apply_checked(&self, sol: &mut ModalSolution1D) -> Result<LimiterOutcome> {
        let flags = self.flags(sol)?;
        let snapshot = sol.clone();
        let quad = projection_quadrature(sol.degree);
        let n = sol.mesh.n_cells;
        let mut deviation = vec![0.0f64; n];
        for cell in 0..n {
            if !flags[cell] {
                continue;
            }
            for var in 0..sol.n_vars {
                let dev = minmod_rebuild_cell_1d(sol, &snapshot, cell, var, &quad.nodes);
                deviation[cell] = deviation[cell].max(dev);
            }
        }
        Ok(LimiterOutcome {
            changed_cells: deviation
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > CHANGE_TOL)
                .map(|(i, _)| i)
                .collect(),
            max_deviation: deviation,
            flagged_cells: Some(
                flags
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(i, _)| i)
                    .collect(),
            ),
        })
    }
}

impl Limiter1D for NnLimiter1D {
    fn apply(&self, sol: &mut ModalSolution1D) -> LimiterOutcome {
        self.apply_checked(sol).expect("schema validated at construction")
    }
}

fn minmod_rebuild_cell_2d(
    sol: &mut ModalSolution2D,
    snapshot: &ModalSolution2D,
    ix: usize,
    iy: usize,
    var: usize,
    nodes: &[f64],
) -> f64 {
    let m1 = sol.n_modes_1d();
    let mm = sol.n_modes();
    let old = snapshot.cell_coeffs(ix, iy, var);
    let avg = old[0];
    let profile_x: Vec<f64> = (0..m1).map(|a| old[a]).collect();
    let lx = eval_modes(&profile_x, -1.0);
    let rx = eval_modes(&profile_x, 1.0);
    let dxp = snapshot.ghost_average(ix as isize + 1, iy as isize, var) - avg;
    let dxm = avg - snapshot.ghost_average(ix as isize - 1, iy as isize, var);
    let sx = minmod(avg - lx, dxp, dxm);
    let trig_x = (sx - (avg - lx)).abs() > CHANGE_TOL;
    let _ = rx;
    let profile_y: Vec<f64> = (0..m1).map(|b| old[b * m1]).collect();
    let ly = eval_modes(&profile_y, -1.0);
    let ry = eval_modes(&profile_y, 1.0);
    let dyp = snapshot.ghost_average(ix as isize, iy as isize + 1, var) - avg;
    let dym = avg - snapshot.ghost_average(ix as isize, iy as isize - 1, var);
    let sy = minmod(avg - ly, dyp, dym);
    let trig_y = (sy - (avg - ly)).abs() > CHANGE_TOL;
    let _ = ry;
    if !trig_x && !trig_y {
        return 0.0;
    }
    let mut new = [0.0; crate::solution::MAX_MODES_2D];
    new[0] = avg;
    new[1] = if trig_x { sx } else { old[1] };
    new[m1] = if trig_y { sy } else { old[m1] };
    let mut dev: f64 = 0.0;
    for &eta in nodes {
        for &xi in nodes {
            dev = dev
                .max((eval_modes_2d(old, m1, xi, eta) - eval_modes_2d(&new[..mm], m1, xi, eta)).abs());
        }
    }
    sol.cell_coeffs_mut(ix, iy, var).copy_from_slice(&new[..mm]);
    dev
}

pub struct NnLimiter2D {
    pub net: Network,
    pub group: InvarianceGroup,
    pub tau: f64,
}

impl NnLimiter2D {
    pub fn from_network(net: Network) -> Result<Self> {
        if net.schema != SchemaId::F2dV1 || net.input_dim != 23 {
            return Err(Error::SchemaMismatch {
                expected: SchemaId::F2dV1.name().into(),
                got: format!("{} (d={})", net.schema.name(), net.input_dim),
            });
        }
        Ok(Self {
            net,
            group: symmetry_group_2d(),
            tau: 0.5,
        })
    }

    pub fn flags(&self, sol: &ModalSolution2D) -> Result<Vec<bool>> {
        let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
        let mut flags = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                for var in 0..sol.n_vars {
                    let x = extract_features_2d(sol, ix, iy, var)?;
                    if predict_invariant(&self.net, &x, &self.group, self.tau)? == 1 {
                        flags[iy * nx + ix] = true;
                        break;
                    }
                }
            }
        }
        Ok(flags)
    }

    pub fn apply_checked(&self, sol: &mut ModalSolution2D) -> Result<LimiterOutcome> {
        let flags = self.flags(sol)?;
        let snapshot = sol.clone();
        let quad = projection_quadrature(sol.degree);
        let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
        let mut deviation = vec![0.0f64; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                if !flags[iy * nx + ix] {
                    continue;
                }
                for var in 0..sol.n_vars {
                    let dev = minmod_rebuild_cell_2d(sol, &snapshot, ix, iy, var, &quad.nodes);
                    deviation[iy * nx + ix] = deviation[iy * nx + ix].max(dev);
                }
            }
        }
        Ok(LimiterOutcome {
            changed_cells: deviation
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > CHANGE_TOL)
                .map(|(i, _)| i)
                .collect(),
            max_deviation: deviation,
            flagged_cells: Some(
                flags
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(i, _)| i)
                    .collect(),
            ),
        })
    }
}

impl Limiter2D for NnLimiter2D {
    fn apply(&self, sol: &mut ModalSolution2D) -> LimiterOutcome {
        self.apply_checked(sol).expect("schema validated at construction")
    }
}

/// Exact coefficient-level mirror of a 1D solution: cell order reversed,
/// odd modes negated, velocity-like variables negated.
pub fn mirror_solution_1d(sol: &ModalSolution1D) -> ModalSolution1D {
    let mut out = sol.clone();
    let n = sol.mesh.n_cells;
    let nm = sol.n_modes();
    for cell in 0..n {
        for var in 0..sol.n_vars {
            let src = sol.cell_coeffs(n - 1 - cell, var);
            let flip = if sol.odd_vars[var] { -1.0 } else { 1.0 };
            let dst = out.cell_coeffs_mut(cell, var);
            for m in 0..nm {
                let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
                dst[m] = flip * parity * src[m];
            }
        }
    }
    if let Some(g) = out.fixed_ghosts.as_mut() {
        std::mem::swap(&mut g.0, &mut g.1);
        for side in [&mut g.0, &mut g.1] {
            for var in 0..sol.n_vars {
                let flip = if sol.odd_vars[var] { -1.0 } else { 1.0 };
                for m in 0..nm {
                    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
                    side[var * nm + m] *= flip * parity;
                }
            }
        }
    }
    out
}

/// Exact x-mirror of a 2D scalar solution.
pub fn mirror_solution_2d_x(sol: &ModalSolution2D) -> ModalSolution2D {
    let mut out = sol.clone();
    let (nx, ny) = (sol.mesh.n_x, sol.mesh.n_y);
    let m1 = sol.n_modes_1d();
    for iy in 0..ny {
        for ix in 0..nx {
            for var in 0..sol.n_vars {
                let src = sol.cell_coeffs(nx - 1 - ix, iy, var);
                let dst = out.cell_coeffs_mut(ix, iy, var);
                for b in 0..m1 {
                    for a in 0..m1 {
                        let parity = if a % 2 == 0 { 1.0 } else { -1.0 };
                        dst[b * m1 + a] = parity * src[b * m1 + a];
                    }
                }
            }
        }
    }
    out
}
