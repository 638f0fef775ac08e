//! Geometric-program solver, successive condensation for signomial programs,
//! and the power-allocation problems built on them.

mod gp;
mod problems;
mod sp;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::signal::SignalError;

pub use gp::{solve_gp, solve_gp_from, GpOptions, GpProblem, GpSolution};
pub use problems::{
    build_joint_mrc_problem, build_txonly_problem, solve_allocation, Allocation, Mode,
    ReceiverKind, VARIABLE_FLOOR,
};
pub use sp::{
    find_feasible_start, solve_sp, RatioConstraint, SolveTrace, SpOptions, SpProblem, Termination,
    START_FEASIBILITY_SLACK,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("start point is infeasible (largest constraint ratio {max_ratio:.6})")]
    StartInfeasible { max_ratio: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}
