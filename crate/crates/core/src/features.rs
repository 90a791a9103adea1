//! Feature extraction for cell patches.
//!
//! A 1D patch yields 11 entries, a 2D patch 23, in the fixed order pinned
//! by the schema id. Width entries stay raw; value entries go through the
//! magnitude normalization and are clamped into [-1, 1]; difference
//! entries are divided by the same denominator.

use crate::error::{Error, Result};
use crate::solution::{eval_modes, ModalSolution1D, ModalSolution2D};

/// Denominators below this count as degenerate and map to feature 0.
pub const DEGENERATE_DENOM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaId {
    F1dV1,
    F2dV1,
}

impl SchemaId {
    pub fn dim(&self) -> usize {
        match self {
            SchemaId::F1dV1 => 11,
            SchemaId::F2dV1 => 23,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemaId::F1dV1 => "f1d_v1",
            SchemaId::F2dV1 => "f2d_v1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "f1d_v1" => Ok(SchemaId::F1dV1),
            "f2d_v1" => Ok(SchemaId::F2dV1),
            other => Err(Error::SchemaMismatch {
                expected: "f1d_v1|f2d_v1".into(),
                got: other.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Width,
    Value,
    Difference,
    Extremum,
}

/// Entry descriptors: names and kinds in schema order.
pub fn schema_entries(id: SchemaId) -> Vec<(&'static str, EntryKind)> {
    use EntryKind::*;
    match id {
        SchemaId::F1dV1 => vec![
            ("h", Width),
            ("u_i", Value),
            ("u_ip1", Value),
            ("u_im1", Value),
            ("trace_left_in", Value),
            ("trace_right_in", Value),
            ("trace_left_out", Value),
            ("trace_right_out", Value),
            ("du_ip1", Difference),
            ("du_im1", Difference),
            ("du_i", Difference),
        ],
        SchemaId::F2dV1 => vec![
            ("dx", Width),
            ("dy", Width),
            ("u_ij", Value),
            ("u_ip1j", Value),
            ("u_im1j", Value),
            ("u_ijp1", Value),
            ("u_ijm1", Value),
            ("xtrace_left_in", Value),
            ("xtrace_right_in", Value),
            ("xtrace_left_out", Value),
            ("xtrace_right_out", Value),
            ("ytrace_bottom_in", Value),
            ("ytrace_top_in", Value),
            ("ytrace_bottom_out", Value),
            ("ytrace_top_out", Value),
            ("du_ip1j", Difference),
            ("du_im1j", Difference),
            ("du_x", Difference),
            ("du_ijp1", Difference),
            ("du_ijm1", Difference),
            ("du_y", Difference),
            ("u_max", Extremum),
            ("u_min", Extremum),
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema: SchemaId,
    pub values: Vec<f64>,
}

/// Magnitude normalization of a pointwise value against patch extremes.
pub fn normalize_value(u_star: f64, u_max: f64, u_min: f64) -> f64 {
    let denom = u_max.abs() + u_min.abs();
    if denom < DEGENERATE_DENOM {
        return 0.0;
    }
    (u_star - u_min) / denom - (u_max - u_star) / denom
}

#[inline]
fn norm_clamped(u: f64, u_max: f64, u_min: f64) -> f64 {
    normalize_value(u, u_max, u_min).clamp(-1.0, 1.0)
}

#[inline]
fn scale_diff(d: f64, denom: f64) -> f64 {
    if denom < DEGENERATE_DENOM {
        0.0
    } else {
        d / denom
    }
}

/// 11-entry feature vector of a 1D cell patch; boundary cells read their
/// neighbors through the mesh's ghost rule.
pub fn extract_features_1d(sol: &ModalSolution1D, cell: usize, var: usize) -> Result<FeatureVector> {
    if cell >= sol.mesh.n_cells {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            limit: sol.mesh.n_cells,
        });
    }
    if var >= sol.n_vars {
        return Err(Error::IndexOutOfRange {
            what: "var",
            index: var,
            limit: sol.n_vars,
        });
    }
    let i = cell as isize;
    let nm = sol.n_modes();
    let center = sol.cell_coeffs(cell, var);
    let plus = sol.ghost_coeffs(i + 1, var);
    let minus = sol.ghost_coeffs(i - 1, var);

    let u_i = center[0];
    let u_ip1 = plus[0];
    let u_im1 = minus[0];
    let u_max = u_i.max(u_ip1).max(u_im1);
    let u_min = u_i.min(u_ip1).min(u_im1);
    let denom = u_max.abs() + u_min.abs();

    let trace_left_in = eval_modes(center, -1.0);
    let trace_right_in = eval_modes(center, 1.0);
    let trace_left_out = eval_modes(&minus[..nm], 1.0);
    let trace_right_out = eval_modes(&plus[..nm], -1.0);

    let values = vec![
        sol.mesh.h,
        norm_clamped(u_i, u_max, u_min),
        norm_clamped(u_ip1, u_max, u_min),
        norm_clamped(u_im1, u_max, u_min),
        norm_clamped(trace_left_in, u_max, u_min),
        norm_clamped(trace_right_in, u_max, u_min),
        norm_clamped(trace_left_out, u_max, u_min),
        norm_clamped(trace_right_out, u_max, u_min),
        scale_diff(u_ip1 - u_i, denom),
        scale_diff(u_i - u_im1, denom),
        scale_diff(0.5 * (u_ip1 - u_im1), denom),
    ];
    Ok(FeatureVector {
        schema: SchemaId::F1dV1,
        values,
    })
}

/// 23-entry feature vector of a 2D cell patch; interface traces are
/// midpoint-of-edge evaluations of the tensor polynomial.
pub fn extract_features_2d(
    sol: &ModalSolution2D,
    ix: usize,
    iy: usize,
    var: usize,
) -> Result<FeatureVector> {
    if ix >= sol.mesh.n_x || iy >= sol.mesh.n_y {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: iy * sol.mesh.n_x + ix,
            limit: sol.mesh.n_cells(),
        });
    }
    if var >= sol.n_vars {
        return Err(Error::IndexOutOfRange {
            what: "var",
            index: var,
            limit: sol.n_vars,
        });
    }
    let m1 = sol.n_modes_1d();
    let mm = sol.n_modes();
    let (i, j) = (ix as isize, iy as isize);
    let center = sol.cell_coeffs(ix, iy, var);
    let xp = sol.ghost_coeffs(i + 1, j, var);
    let xm = sol.ghost_coeffs(i - 1, j, var);
    let yp = sol.ghost_coeffs(i, j + 1, var);
    let ym = sol.ghost_coeffs(i, j - 1, var);

    let u0 = center[0];
    let u_xp = xp[0];
    let u_xm = xm[0];
    let u_yp = yp[0];
    let u_ym = ym[0];
    let u_max = u0.max(u_xp).max(u_xm).max(u_yp).max(u_ym);
    let u_min = u0.min(u_xp).min(u_xm).min(u_yp).min(u_ym);
    let denom = u_max.abs() + u_min.abs();

    let ev = |c: &[f64], xi: f64, eta: f64| crate::solution::eval_modes_2d(c, m1, xi, eta);
    // face-midpoint traces, inside then outside reconstructions
    let x_left_in = ev(center, -1.0, 0.0);
    let x_right_in = ev(center, 1.0, 0.0);
    let x_left_out = ev(&xm[..mm], 1.0, 0.0);
    let x_right_out = ev(&xp[..mm], -1.0, 0.0);
    let y_bottom_in = ev(center, 0.0, -1.0);
    let y_top_in = ev(center, 0.0, 1.0);
    let y_bottom_out = ev(&ym[..mm], 0.0, 1.0);
    let y_top_out = ev(&yp[..mm], 0.0, -1.0);

    let values = vec![
        sol.mesh.dx,
        sol.mesh.dy,
        norm_clamped(u0, u_max, u_min),
        norm_clamped(u_xp, u_max, u_min),
        norm_clamped(u_xm, u_max, u_min),
        norm_clamped(u_yp, u_max, u_min),
        norm_clamped(u_ym, u_max, u_min),
        norm_clamped(x_left_in, u_max, u_min),
        norm_clamped(x_right_in, u_max, u_min),
        norm_clamped(x_left_out, u_max, u_min),
        norm_clamped(x_right_out, u_max, u_min),
        norm_clamped(y_bottom_in, u_max, u_min),
        norm_clamped(y_top_in, u_max, u_min),
        norm_clamped(y_bottom_out, u_max, u_min),
        norm_clamped(y_top_out, u_max, u_min),
        scale_diff(u_xp - u0, denom),
        scale_diff(u0 - u_xm, denom),
        scale_diff(0.5 * (u_xp - u_xm), denom),
        scale_diff(u_yp - u0, denom),
        scale_diff(u0 - u_ym, denom),
        scale_diff(0.5 * (u_yp - u_ym), denom),
        norm_clamped(u_max, u_max, u_min),
        norm_clamped(u_min, u_max, u_min),
    ];
    Ok(FeatureVector {
        schema: SchemaId::F2dV1,
        values,
    })
}

/// Raw quantities of a triangular element patch: center element, its three
/// edge neighbors, and the center element's edge-midpoint values.
#[derive(Debug, Clone)]
pub struct TrianglePatch {
    pub area: f64,
    pub center_avg: f64,
    pub neighbor_avgs: [f64; 3],
    pub edge_midpoint_values: [f64; 3],
}

/// Map a triangular patch into the 23-slot Cartesian schema.
///
/// Slots follow the published transformation: both widths become sqrt(area),
/// slot 7 becomes the patch mean, slots 11/15 repeat the center average,
/// slot 20 is the identically-zero placeholder difference, and the two
/// extremum slots are filled from the patch averages as in the Cartesian
/// extractor.
pub fn remap_features_triangle(patch: &TrianglePatch) -> Result<FeatureVector> {
    if !(patch.area > 0.0) {
        return Err(Error::InvalidPatch(format!(
            "element area {} must be positive",
            patch.area
        )));
    }
    let w = patch.area.sqrt();
    let u_i = patch.center_avg;
    let [n1, n2, n3] = patch.neighbor_avgs;
    let patch_mean = 0.25 * (u_i + n1 + n2 + n3);
    let [e1, e2, e3] = patch.edge_midpoint_values;

    let u_max = u_i.max(n1).max(n2).max(n3).max(patch_mean);
    let u_min = u_i.min(n1).min(n2).min(n3).min(patch_mean);
    let denom = u_max.abs() + u_min.abs();

    let values = vec![
        w,
        w,
        norm_clamped(u_i, u_max, u_min),
        norm_clamped(n1, u_max, u_min),
        norm_clamped(n2, u_max, u_min),
        norm_clamped(n3, u_max, u_min),
        norm_clamped(patch_mean, u_max, u_min),
        norm_clamped(e1, u_max, u_min),
        norm_clamped(e2, u_max, u_min),
        norm_clamped(e3, u_max, u_min),
        norm_clamped(u_i, u_max, u_min),
        norm_clamped(e1, u_max, u_min),
        norm_clamped(e2, u_max, u_min),
        norm_clamped(e3, u_max, u_min),
        norm_clamped(u_i, u_max, u_min),
        scale_diff(u_i - n1, denom),
        scale_diff(u_i - n2, denom),
        scale_diff(0.5 * (n1 - n2), denom),
        scale_diff(u_i - n3, denom),
        0.0,
        scale_diff(0.5 * (n1 - n3), denom),
        norm_clamped(u_max, u_max, u_min),
        norm_clamped(u_min, u_max, u_min),
    ];
    Ok(FeatureVector {
        schema: SchemaId::F2dV1,
        values,
    })
}
