//! Scenario files, experiment runs and their CSV output.

mod results;
mod scenario;

use rayon::prelude::*;

use crate::scene::{ChannelSet, Scene};
use crate::solver::{solve_allocation, Allocation, Mode, ReceiverKind, SolveError, SpOptions};

pub use results::{
    read_results, read_trace, to_db, trace_rows, write_results, write_trace, ResultRow, RowStatus,
    TraceRow, RESULT_HEADER, TRACE_HEADER,
};
pub use scenario::{parse_scenario, parse_scenario_str, Scenario, ScenarioError, BUNDLED_SCENARIO};

/// Solves for the demands stored in `scene`. The row's `psi` is the largest
/// demand.
pub fn solve_scene(
    scene: &Scene,
    channels: &ChannelSet,
    combiner: ReceiverKind,
    mode: Mode,
    seed: u64,
    options: &SpOptions,
) -> Result<(ResultRow, Allocation), SolveError> {
    let psi = scene
        .sinr_demands
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let alloc = solve_allocation(scene, channels, combiner, mode, options)?;
    let row = ResultRow::solved(
        psi,
        combiner,
        mode,
        alloc.objective,
        alloc.sinr_min(),
        &alloc.trace,
        seed,
    );
    Ok((row, alloc))
}

/// Solves one operating point with every demand set to `psi`.
pub fn solve_point(
    scene: &Scene,
    channels: &ChannelSet,
    psi: f64,
    combiner: ReceiverKind,
    mode: Mode,
    seed: u64,
    options: &SpOptions,
) -> Result<(ResultRow, Allocation), SolveError> {
    solve_scene(
        &scene.with_uniform_demand(psi),
        channels,
        combiner,
        mode,
        seed,
        options,
    )
}

/// Like [`solve_point`], but solver failures become rows.
pub fn sweep_point(
    scene: &Scene,
    channels: &ChannelSet,
    psi: f64,
    combiner: ReceiverKind,
    mode: Mode,
    seed: u64,
    options: &SpOptions,
) -> Result<ResultRow, SolveError> {
    match solve_point(scene, channels, psi, combiner, mode, seed, options) {
        Ok((row, _)) => Ok(row),
        Err(err) => match RowStatus::from_error(&err) {
            Some(status) => Ok(ResultRow::failed(psi, combiner, mode, status, seed)),
            None => Err(err),
        },
    }
}

/// `from, from + step, ...` up to `to` inclusive (with a 1e-9 step margin).
/// Values are rounded to 12 significant digits so they print cleanly.
pub fn psi_ladder(from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(format!("step must be positive, got {step}"));
    }
    if !(from > 0.0) || !(to >= from) || !to.is_finite() {
        return Err(format!("need 0 < from <= to, got from = {from}, to = {to}"));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = from + i as f64 * step;
            format!("{v:.11e}").parse().expect("formatted float")
        })
        .collect())
}

/// Every `(psi, configuration)` pair, solved in parallel. Rows come back
/// ordered by `psi`, then by position in `configs`.
pub fn sweep(
    scene: &Scene,
    channels: &ChannelSet,
    psis: &[f64],
    configs: &[(ReceiverKind, Mode)],
    seed: u64,
    options: &SpOptions,
) -> Result<Vec<ResultRow>, SolveError> {
    let jobs: Vec<(f64, ReceiverKind, Mode)> = psis
        .iter()
        .flat_map(|&psi| configs.iter().map(move |&(c, m)| (psi, c, m)))
        .collect();
    jobs.par_iter()
        .map(|&(psi, c, m)| sweep_point(scene, channels, psi, c, m, seed, options))
        .collect()
}
