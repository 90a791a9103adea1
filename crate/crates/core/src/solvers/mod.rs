//! RKDG solvers for 1D/2D linear advection and the 1D Euler system.

pub mod ic;
pub mod rhs;
pub mod run;

pub use run::{
    run, run_1d, run_2d, Equation, Failure, LimitVars, LimiterSpec, Report, RunReport1D,
    RunReport2D, SimConfig,
};
