//! RKDG time integration: SSP-RK2/3 matched to spatial order, a limiter
//! hook after every stage, and run reports with L1 errors and flag counts.

use crate::error::{Error, Result};
use crate::euler::{prim_to_cons, EulerParams};
use crate::limiters::{HioLimiter, Limiter1D, Limiter2D, LimiterOutcome, MinmodLimiter, TvdLimiter};
use crate::mesh::{Mesh1D, Mesh2D};
use crate::metrics::{l1_error_1d, l1_error_2d};
use crate::solution::{project_ic_1d, project_scalar_1d, project_scalar_2d, ModalSolution1D, ModalSolution2D};
use crate::solvers::ic::{make_ic, Ic};
use crate::solvers::rhs::{euler_max_speed, rhs_advection_1d, rhs_advection_2d, rhs_euler_1d, DgTables};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    Advection1d { a: f64 },
    Euler1d { gas: EulerParams },
    Advection2d { a: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimiterSpec {
    None,
    Minmod,
    Tvd { m: f64 },
    Hio,
    /// Neural limiter; the model file is loaded when the run starts.
    Nn { model_path: String },
}

impl LimiterSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LimiterSpec::None => "none",
            LimiterSpec::Minmod => "minmod",
            LimiterSpec::Tvd { .. } => "tvd",
            LimiterSpec::Hio => "hio",
            LimiterSpec::Nn { .. } => "nn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVars {
    Conserved,
    Primitive,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub equation: Equation,
    pub ic_name: String,
    /// Cells (per axis in 2D).
    pub n: usize,
    /// Approximation order p + 1, in {2, 3}.
    pub order: usize,
    /// Defaults to the initial condition's own final time.
    pub t_end: Option<f64>,
    pub cfl: f64,
    pub limiter: LimiterSpec,
    pub limit_vars: LimitVars,
}

impl SimConfig {
    pub fn new(equation: Equation, ic_name: &str, n: usize, order: usize) -> Self {
        Self {
            equation,
            ic_name: ic_name.to_string(),
            n,
            order,
            t_end: None,
            cfl: 0.1,
            limiter: LimiterSpec::None,
            limit_vars: LimitVars::Primitive,
        }
    }

    pub fn degree(&self) -> usize {
        self.order - 1
    }
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub time: f64,
    pub cell: usize,
    pub what: String,
}

#[derive(Debug)]
pub struct RunReport1D {
    pub final_solution: ModalSolution1D,
    pub final_time: f64,
    pub l1_error: Option<Vec<f64>>,
    pub flagged_per_step: Vec<usize>,
    pub wall_time: f64,
    pub steps: usize,
    pub failure: Option<Failure>,
}

#[derive(Debug)]
pub struct RunReport2D {
    pub final_solution: ModalSolution2D,
    pub final_time: f64,
    pub l1_error: Option<Vec<f64>>,
    pub flagged_per_step: Vec<usize>,
    pub wall_time: f64,
    pub steps: usize,
    pub failure: Option<Failure>,
}

pub enum Report {
    OneD(RunReport1D),
    TwoD(RunReport2D),
}

fn now() -> Option<std::time::Instant> {
    #[cfg(target_arch = "wasm32")]
    {
        None
    }
    #[cfg(not(target_arch = "wasm32"))]
    {
        Some(std::time::Instant::now())
    }
}

fn elapsed(start: Option<std::time::Instant>) -> f64 {
    start.map(|s| s.elapsed().as_secs_f64()).unwrap_or(0.0)
}

/// SSP-RK stage coefficients in increment form:
/// `w_{i+1} = u + c_i (w_i - u + dt L(w_i))`, limiter after every stage.
fn stage_coeffs(order: usize) -> &'static [f64] {
    match order {
        2 => &[1.0, 0.5],
        _ => &[1.0, 0.25, 2.0 / 3.0],
    }
}

/// One SSP-RK step on a 1D solution. Returns per-stage limiter outcomes.
pub fn ssp_step_1d(
    sol: &mut ModalSolution1D,
    dt: f64,
    order: usize,
    rhs: &mut dyn FnMut(&ModalSolution1D, &mut [f64]) -> Result<()>,
    stage_limit: &mut dyn FnMut(&mut ModalSolution1D) -> Result<Option<LimiterOutcome>>,
) -> Result<Vec<LimiterOutcome>> {
    let base = sol.coeffs.clone();
    let mut k = vec![0.0; base.len()];
    let mut outcomes = Vec::new();
    for &c in stage_coeffs(order) {
        rhs(sol, &mut k)?;
        for (i, v) in sol.coeffs.iter_mut().enumerate() {
            *v = base[i] + c * (*v - base[i] + dt * k[i]);
        }
        if let Some(outcome) = stage_limit(sol)? {
            outcomes.push(outcome);
        }
    }
    Ok(outcomes)
}

/// One SSP-RK step on a 2D solution.
pub fn ssp_step_2d(
    sol: &mut ModalSolution2D,
    dt: f64,
    order: usize,
    rhs: &mut dyn FnMut(&ModalSolution2D, &mut [f64]) -> Result<()>,
    stage_limit: &mut dyn FnMut(&mut ModalSolution2D) -> Result<Option<LimiterOutcome>>,
) -> Result<Vec<LimiterOutcome>> {
    let base = sol.coeffs.clone();
    let mut k = vec![0.0; base.len()];
    let mut outcomes = Vec::new();
    for &c in stage_coeffs(order) {
        rhs(sol, &mut k)?;
        for (i, v) in sol.coeffs.iter_mut().enumerate() {
            *v = base[i] + c * (*v - base[i] + dt * k[i]);
        }
        if let Some(outcome) = stage_limit(sol)? {
            outcomes.push(outcome);
        }
    }
    Ok(outcomes)
}

fn union_flag_count(outcomes: &[LimiterOutcome], n_cells: usize) -> usize {
    let mut flagged = vec![false; n_cells];
    for o in outcomes {
        for &c in o.flag_view() {
            flagged[c] = true;
        }
    }
    flagged.iter().filter(|&&f| f).count()
}

fn build_limiter_1d(spec: &LimiterSpec) -> Result<Option<Box<dyn Limiter1D>>> {
    Ok(match spec {
        LimiterSpec::None => None,
        LimiterSpec::Minmod => Some(Box::new(MinmodLimiter)),
        LimiterSpec::Tvd { m } => Some(Box::new(TvdLimiter { m: *m })),
        LimiterSpec::Hio => Some(Box::new(HioLimiter)),
        LimiterSpec::Nn { model_path } => {
            let net = crate::mlp::load_model(std::path::Path::new(model_path))?;
            Some(Box::new(crate::nnlimiter::NnLimiter1D::from_network(net)?))
        }
    })
}

fn build_limiter_2d(spec: &LimiterSpec) -> Result<Option<Box<dyn Limiter2D>>> {
    Ok(match spec {
        LimiterSpec::None => None,
        LimiterSpec::Minmod => Some(Box::new(MinmodLimiter)),
        LimiterSpec::Tvd { .. } => {
            return Err(Error::InvalidArgument(
                "tvd limiter is 1D-only".into(),
            ))
        }
        LimiterSpec::Hio => Some(Box::new(HioLimiter)),
        LimiterSpec::Nn { model_path } => {
            let net = crate::mlp::load_model(std::path::Path::new(model_path))?;
            Some(Box::new(crate::nnlimiter::NnLimiter2D::from_network(net)?))
        }
    })
}

/// Apply a limiter to an Euler stage state on the configured variable set.
///
/// A pre-limit stage state near a strong shock can carry negative nodal
/// pressure, which makes the primitive conversion impossible before the
/// limiter has run. Such stages fall back to limiting the conserved
/// moments directly. After limiting, any cell whose reconstruction still
/// carries a nonphysical node is flattened to its (conservative) averages;
/// a cell with nonphysical averages is a genuine failure.
pub fn limit_euler_stage(
    sol: &mut ModalSolution1D,
    gas: EulerParams,
    limit_vars: LimitVars,
    limiter: &dyn Limiter1D,
) -> Result<LimiterOutcome> {
    let outcome = match limit_vars {
        LimitVars::Conserved => limiter.apply(sol),
        LimitVars::Primitive => {
            match crate::euler::solution_to_primitive(sol, gas) {
                Ok(mut prim) => {
                    let outcome = limiter.apply(&mut prim);
                    for &cell in &outcome.changed_cells {
                        crate::euler::primitive_cell_to_conserved(&prim, cell, gas, sol)?;
                    }
                    outcome
                }
                Err(Error::Positivity { .. }) => limiter.apply(sol),
                Err(other) => return Err(other),
            }
        }
    };
    flatten_nonphysical_cells(sol, gas)?;
    Ok(outcome)
}

/// Emergency first-order fallback: reduce a cell to its averages when the
/// limited reconstruction still evaluates to nonpositive density or
/// pressure somewhere in the cell.
fn flatten_nonphysical_cells(sol: &mut ModalSolution1D, gas: EulerParams) -> Result<()> {
    let quad = crate::solution::projection_quadrature(sol.degree);
    let mut points: Vec<f64> = vec![-1.0, 1.0];
    points.extend_from_slice(&quad.nodes);
    for cell in 0..sol.mesh.n_cells {
        let physical = points.iter().all(|&xi| {
            let state = [
                sol.eval_at(cell, 0, xi).expect("valid indices"),
                sol.eval_at(cell, 1, xi).expect("valid indices"),
                sol.eval_at(cell, 2, xi).expect("valid indices"),
            ];
            crate::euler::cons_to_prim(state, gas, cell).is_ok()
        });
        if physical {
            continue;
        }
        let avg_state = [
            sol.average(cell, 0),
            sol.average(cell, 1),
            sol.average(cell, 2),
        ];
        // averages must themselves be physical, otherwise the run is lost
        crate::euler::cons_to_prim(avg_state, gas, cell)?;
        for var in 0..3 {
            let coeffs = sol.cell_coeffs_mut(cell, var);
            for c in coeffs.iter_mut().skip(1) {
                *c = 0.0;
            }
        }
    }
    Ok(())
}

/// Run a configured simulation.
pub fn run(config: &SimConfig) -> Result<Report> {
    match config.equation {
        Equation::Advection1d { .. } | Equation::Euler1d { .. } => {
            let limiter = build_limiter_1d(&config.limiter)?;
            Ok(Report::OneD(run_1d(config, limiter.as_deref())?))
        }
        Equation::Advection2d { .. } => {
            let limiter = build_limiter_2d(&config.limiter)?;
            Ok(Report::TwoD(run_2d(config, limiter.as_deref())?))
        }
    }
}

/// 1D driver with an explicit limiter object (model already in memory).
pub fn run_1d(config: &SimConfig, limiter: Option<&dyn Limiter1D>) -> Result<RunReport1D> {
    let start = now();
    let ic = make_ic(&config.ic_name)?;
    let degree = config.degree();
    let tables = DgTables::new(degree);
    let t_end = config.t_end.unwrap_or_else(|| ic.default_t_end());

    match (&ic, config.equation) {
        (Ic::Scalar1d { f, boundary, .. }, Equation::Advection1d { a }) => {
            let mesh = Mesh1D::unit(config.n, *boundary)?;
            let mut sol = project_scalar_1d(&mesh, degree, f)?;
            let dt0 = if a.abs() > 1e-300 {
                config.cfl * mesh.h / a.abs()
            } else {
                t_end
            };
            let mut t = 0.0;
            let mut steps = 0;
            let mut flags = Vec::new();
            while t < t_end - 1e-12 && t_end > 0.0 {
                let dt = dt0.min(t_end - t);
                let outcomes = ssp_step_1d(
                    &mut sol,
                    dt,
                    config.order,
                    &mut |s, k| {
                        rhs_advection_1d(s, a, &tables, k);
                        Ok(())
                    },
                    &mut |s| Ok(limiter.map(|l| l.apply(s))),
                )?;
                flags.push(union_flag_count(&outcomes, config.n));
                t += dt;
                steps += 1;
            }
            let exact = move |x: f64| f(wrap_unit(x - a * t_end));
            let l1 = l1_error_1d(&sol, |x, out| out[0] = exact(x));
            Ok(RunReport1D {
                final_solution: sol,
                final_time: t_end,
                l1_error: Some(l1),
                flagged_per_step: flags,
                wall_time: elapsed(start),
                steps,
                failure: None,
            })
        }
        (Ic::Euler1d { f, boundary, .. }, Equation::Euler1d { gas }) => {
            let mesh = Mesh1D::unit(config.n, *boundary)?;
            let mut sol = project_ic_1d(&mesh, degree, 3, |x, out| {
                out.copy_from_slice(&prim_to_cons(f(x), gas));
            })?;
            sol.odd_vars = vec![false, true, false];
            let mut t = 0.0;
            let mut steps = 0;
            let mut flags = Vec::new();
            let mut failure = None;
            // limit the projected initial data once, as the first stage would
            if let Some(l) = limiter {
                if let Err(e) = limit_euler_stage(&mut sol, gas, config.limit_vars, l) {
                    failure = Some(failure_from(e, t));
                }
            }
            while failure.is_none() && t < t_end - 1e-12 {
                let speed = match euler_max_speed(&sol, gas, &tables) {
                    Ok(s) => s,
                    Err(e) => {
                        failure = Some(failure_from(e, t));
                        break;
                    }
                };
                let dt = (config.cfl * mesh.h / speed).min(t_end - t);
                let result = ssp_step_1d(
                    &mut sol,
                    dt,
                    config.order,
                    &mut |s, k| rhs_euler_1d(s, gas, &tables, k),
                    &mut |s| match limiter {
                        Some(l) => limit_euler_stage(s, gas, config.limit_vars, l).map(Some),
                        None => Ok(None),
                    },
                );
                match result {
                    Ok(outcomes) => {
                        flags.push(union_flag_count(&outcomes, config.n));
                        t += dt;
                        steps += 1;
                    }
                    Err(e) => {
                        failure = Some(failure_from(e, t));
                        break;
                    }
                }
            }
            Ok(RunReport1D {
                final_solution: sol,
                final_time: t,
                l1_error: None,
                flagged_per_step: flags,
                wall_time: elapsed(start),
                steps,
                failure,
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "initial condition `{}` does not fit the requested equation",
            config.ic_name
        ))),
    }
}

/// 2D driver with an explicit limiter object.
pub fn run_2d(config: &SimConfig, limiter: Option<&dyn Limiter2D>) -> Result<RunReport2D> {
    let start = now();
    let ic = make_ic(&config.ic_name)?;
    let degree = config.degree();
    let tables = DgTables::new(degree);
    let t_end = config.t_end.unwrap_or_else(|| ic.default_t_end());
    let a = match config.equation {
        Equation::Advection2d { a } => a,
        _ => {
            return Err(Error::InvalidArgument(
                "run_2d requires a 2D equation".into(),
            ))
        }
    };
    let f = match &ic {
        Ic::Scalar2d { f, .. } => f,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "initial condition `{}` is not two-dimensional",
                config.ic_name
            )))
        }
    };
    let mesh = Mesh2D::unit(config.n, ic.boundary())?;
    let mut sol = project_scalar_2d(&mesh, degree, f)?;
    let speed = a[0].abs() + a[1].abs();
    let dt0 = if speed > 1e-300 {
        config.cfl * mesh.dx.min(mesh.dy) / speed
    } else {
        t_end
    };
    let mut t = 0.0;
    let mut steps = 0;
    let mut flags = Vec::new();
    while t < t_end - 1e-12 && t_end > 0.0 {
        let dt = dt0.min(t_end - t);
        let outcomes = ssp_step_2d(
            &mut sol,
            dt,
            config.order,
            &mut |s, k| {
                rhs_advection_2d(s, a, &tables, k);
                Ok(())
            },
            &mut |s| Ok(limiter.map(|l| l.apply(s))),
        )?;
        flags.push(union_flag_count(&outcomes, config.n * config.n));
        t += dt;
        steps += 1;
    }
    let l1 = l1_error_2d(&sol, |x, y| {
        f(wrap_unit(x - a[0] * t_end), wrap_unit(y - a[1] * t_end))
    });
    Ok(RunReport2D {
        final_solution: sol,
        final_time: t_end,
        l1_error: Some(vec![l1]),
        flagged_per_step: flags,
        wall_time: elapsed(start),
        steps,
        failure: None,
    })
}

fn failure_from(e: Error, t: f64) -> Failure {
    match e {
        Error::Positivity { cell, what, value } => Failure {
            time: t,
            cell,
            what: format!("{what} = {value}"),
        },
        other => Failure {
            time: t,
            cell: usize::MAX,
            what: other.to_string(),
        },
    }
}

/// Map a coordinate into [0, 1) for periodic exact profiles.
pub fn wrap_unit(x: f64) -> f64 {
    let mut v = x % 1.0;
    if v < 0.0 {
        v += 1.0;
    }
    v
}

/// Total integral per variable: sum of cell averages times cell width.
pub fn total_mass_1d(sol: &ModalSolution1D) -> Vec<f64> {
    (0..sol.n_vars)
        .map(|var| {
            (0..sol.mesh.n_cells)
                .map(|c| sol.average(c, var) * sol.mesh.h)
                .sum()
        })
        .collect()
}

/// Snapshot CSV: `# t=.. n=.. order=.. limiter=..` then x plus one column
/// of cell averages per variable.
pub fn write_snapshot_1d(
    sol: &ModalSolution1D,
    t: f64,
    limiter_name: &str,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# t={} n={} order={} limiter={}",
        t,
        sol.mesh.n_cells,
        sol.degree + 1,
        limiter_name
    )?;
    let header: Vec<String> = (0..sol.n_vars).map(|v| format!("u{v}")).collect();
    writeln!(out, "x,{}", header.join(","))?;
    for cell in 0..sol.mesh.n_cells {
        let mut row = format!("{}", sol.mesh.cell_center(cell));
        for var in 0..sol.n_vars {
            row.push(',');
            row.push_str(&format!("{}", sol.average(cell, var)));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Snapshot CSV in 2D: x, y, then cell averages.
pub fn write_snapshot_2d(
    sol: &ModalSolution2D,
    t: f64,
    limiter_name: &str,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# t={} n={} order={} limiter={}",
        t,
        sol.mesh.n_x,
        sol.degree + 1,
        limiter_name
    )?;
    writeln!(out, "x,y,u0")?;
    for iy in 0..sol.mesh.n_y {
        for ix in 0..sol.mesh.n_x {
            let (x, y) = sol.mesh.cell_center(ix, iy);
            writeln!(out, "{x},{y},{}", sol.average(ix, iy, 0))?;
        }
    }
    Ok(())
}
