//! Uniform Cartesian meshes in one and two dimensions.

use crate::error::{Error, Result};

/// Boundary treatment for ghost cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Zero-order extrapolation: ghost copies the nearest interior cell.
    GradientFree,
    /// Wall reflection: even modes copied, odd modes negated; velocity
    /// components additionally flip sign.
    Reflexive,
    /// Ghosts hold the projected initial condition for the whole run.
    FixedToInitial,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::GradientFree => "gradient_free",
            Boundary::Reflexive => "reflexive",
            Boundary::FixedToInitial => "fixed_to_initial",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub h: f64,
    pub boundary: Boundary,
}

impl Mesh1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if n_cells < 3 {
            return Err(Error::InvalidMesh(format!("n_cells = {n_cells} < 3")));
        }
        if !(x_max > x_min) {
            return Err(Error::InvalidMesh(format!(
                "empty extent [{x_min}, {x_max}]"
            )));
        }
        let h = (x_max - x_min) / n_cells as f64;
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            h,
            boundary,
        })
    }

    /// Unit interval mesh, the domain of every named test case.
    pub fn unit(n_cells: usize, boundary: Boundary) -> Result<Self> {
        Self::new(0.0, 1.0, n_cells, boundary)
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.h
    }

    /// Physical coordinate of reference point `xi` in cell `i`.
    pub fn to_physical(&self, i: usize, xi: f64) -> f64 {
        self.cell_center(i) + 0.5 * self.h * xi
    }
}

#[derive(Debug, Clone)]
pub struct Mesh2D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub dx: f64,
    pub dy: f64,
    pub boundary: Boundary,
}

impl Mesh2D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        n_x: usize,
        n_y: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        if n_x < 3 || n_y < 3 {
            return Err(Error::InvalidMesh(format!("n_x = {n_x}, n_y = {n_y} (< 3)")));
        }
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidMesh("empty extent".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            n_x,
            n_y,
            dx: (x_max - x_min) / n_x as f64,
            dy: (y_max - y_min) / n_y as f64,
            boundary,
        })
    }

    pub fn unit(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(0.0, 1.0, 0.0, 1.0, n, n, boundary)
    }

    pub fn n_cells(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.x_min + (ix as f64 + 0.5) * self.dx,
            self.y_min + (iy as f64 + 0.5) * self.dy,
        )
    }

    pub fn to_physical(&self, ix: usize, iy: usize, xi: f64, eta: f64) -> (f64, f64) {
        let (cx, cy) = self.cell_center(ix, iy);
        (cx + 0.5 * self.dx * xi, cy + 0.5 * self.dy * eta)
    }
}
