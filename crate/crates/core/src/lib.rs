//! Minimum-power transmit and amplification allocation for an RF sensing
//! network: a planar-array transmitter probes targets and clutters, distributed
//! amplify-and-forward sensors relay the reflections, and a multi-antenna
//! fusion center combines them.
//!
//! The per-target SINR constraints make the allocation a signomial program.
//! [`solver::solve_sp`] handles it by repeatedly condensing each constraint
//! denominator into a monomial and solving the resulting geometric program
//! with a log-space barrier method.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod beamforming;
pub mod experiment;
pub mod scene;
pub mod signal;
pub mod solver;
