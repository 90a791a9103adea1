//! Named initial conditions for the 1D/2D test problems.

use crate::error::{Error, Result};
use crate::mesh::Boundary;
use std::f64::consts::PI;

pub const REGISTERED: [&str; 12] = [
    "gaussian1d",
    "gausshat1d",
    "sine1d",
    "square1d",
    "halfsine1d",
    "sod",
    "blast",
    "shuosher",
    "smoothring2d",
    "gausshat2d",
    "ring2d",
    "gaussian2d",
];

/// An evaluable initial condition together with its run defaults.
pub enum Ic {
    Scalar1d {
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        boundary: Boundary,
        default_t_end: f64,
    },
    /// Primitive-variable field (rho, v, p).
    Euler1d {
        f: Box<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
        boundary: Boundary,
        default_t_end: f64,
    },
    Scalar2d {
        f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        boundary: Boundary,
        default_t_end: f64,
    },
}

impl Ic {
    pub fn boundary(&self) -> Boundary {
        match self {
            Ic::Scalar1d { boundary, .. }
            | Ic::Euler1d { boundary, .. }
            | Ic::Scalar2d { boundary, .. } => *boundary,
        }
    }

    pub fn default_t_end(&self) -> f64 {
        match self {
            Ic::Scalar1d { default_t_end, .. }
            | Ic::Euler1d { default_t_end, .. }
            | Ic::Scalar2d { default_t_end, .. } => *default_t_end,
        }
    }
}

pub fn gaussian1d(x: f64) -> f64 {
    1.0 + 3.0 * (-100.0 * (x - 0.5) * (x - 0.5)).exp()
}

pub fn gausshat1d(x: f64) -> f64 {
    if (x - 0.7).abs() <= 0.1 {
        2.0
    } else {
        1.0 + (-(x - 0.25) * (x - 0.25) / (2.0 * 0.05 * 0.05)).exp()
    }
}

pub fn sine1d(x: f64) -> f64 {
    (2.0 * PI * x).sin()
}

pub fn square1d(x: f64) -> f64 {
    if (0.25..=0.75).contains(&x) {
        8.0
    } else {
        2.0
    }
}

pub fn halfsine1d(x: f64) -> f64 {
    if x <= 0.3 {
        0.5 * (2.0 * PI * x).sin()
    } else {
        0.0
    }
}

pub fn sod(x: f64) -> [f64; 3] {
    if x <= 0.5 {
        [1.0, 0.0, 1.0]
    } else {
        [0.125, 0.0, 0.1]
    }
}

pub fn blast(x: f64) -> [f64; 3] {
    if x <= 0.1 {
        [1.0, 0.0, 1000.0]
    } else if x <= 0.9 {
        [1.0, 0.0, 0.01]
    } else {
        [1.0, 0.0, 100.0]
    }
}

pub fn shuosher(x: f64) -> [f64; 3] {
    if x <= 0.125 {
        [3.857143, 2.629369, 10.3333]
    } else {
        [1.0 + 0.2 * (8.0 * PI * x).sin(), 0.0, 1.0]
    }
}

/// Ring radius measured from the domain center.
pub fn smoothring2d(x: f64, y: f64) -> f64 {
    let r = ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)).sqrt();
    1.0 + (2.0 * PI * r).sin().powi(10)
}

pub fn gausshat2d(x: f64, y: f64) -> f64 {
    if (x - 0.25).abs() <= 0.1 && (y - 0.5).abs() <= 0.1 {
        2.0
    } else if x >= 0.5 {
        let d2 = (x - 0.75) * (x - 0.75) + (y - 0.5) * (y - 0.5);
        1.0 + (-100.0 * d2).exp()
    } else {
        1.0
    }
}

/// Annular step, radius measured from the origin.
pub fn ring2d(x: f64, y: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    if (0.25..=0.75).contains(&r) {
        8.0
    } else {
        2.0
    }
}

pub fn gaussian2d(x: f64, y: f64) -> f64 {
    let s = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    (-10.0 * s * s).exp()
}

/// Look up an initial condition by its registered name.
pub fn make_ic(name: &str) -> Result<Ic> {
    let scalar = |f: fn(f64) -> f64| Ic::Scalar1d {
        f: Box::new(f),
        boundary: Boundary::Periodic,
        default_t_end: 1.0,
    };
    let scalar2 = |f: fn(f64, f64) -> f64| Ic::Scalar2d {
        f: Box::new(f),
        boundary: Boundary::Periodic,
        default_t_end: 1.0,
    };
    Ok(match name {
        "gaussian1d" => scalar(gaussian1d),
        "gausshat1d" => scalar(gausshat1d),
        "sine1d" => scalar(sine1d),
        "square1d" => scalar(square1d),
        "halfsine1d" => scalar(halfsine1d),
        "sod" => Ic::Euler1d {
            f: Box::new(sod),
            boundary: Boundary::GradientFree,
            default_t_end: 0.24,
        },
        "blast" => Ic::Euler1d {
            f: Box::new(blast),
            boundary: Boundary::Reflexive,
            default_t_end: 0.038,
        },
        "shuosher" => Ic::Euler1d {
            f: Box::new(shuosher),
            boundary: Boundary::FixedToInitial,
            default_t_end: 0.178,
        },
        "smoothring2d" => scalar2(smoothring2d),
        "gausshat2d" => scalar2(gausshat2d),
        "ring2d" => scalar2(ring2d),
        "gaussian2d" => scalar2(gaussian2d),
        _ => {
            return Err(Error::UnknownIc(name.to_string(), REGISTERED.join(", ")));
        }
    })
}
