use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::solver::{Mode, ReceiverKind, SolveError, SolveTrace, Termination};

pub const RESULT_HEADER: &str =
    "psi,combiner,mode,objective_linear,objective_db,sinr_min,iterations,termination,seed";
pub const TRACE_HEADER: &str = "q,objective_db";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Converged,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

impl From<Termination> for RowStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Converged => RowStatus::Converged,
            Termination::MaxIterations => RowStatus::MaxIterations,
            Termination::Infeasible => RowStatus::Infeasible,
        }
    }
}

impl RowStatus {
    /// Status recorded for a point whose solve failed. Rank-deficient ZF
    /// counts as infeasible. Problem-construction errors have no row.
    pub fn from_error(err: &SolveError) -> Option<Self> {
        match err {
            SolveError::Infeasible(_)
            | SolveError::StartInfeasible { .. }
            | SolveError::Signal(_) => Some(RowStatus::Infeasible),
            SolveError::NumericalFailure(_) => Some(RowStatus::NumericalFailure),
            SolveError::InvalidProblem(_) | SolveError::Algebra(_) => None,
        }
    }
}

/// One solved (or failed) operating point. Failed points leave the objective
/// and SINR fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub psi: f64,
    pub combiner: ReceiverKind,
    pub mode: Mode,
    pub objective_linear: Option<f64>,
    pub objective_db: Option<f64>,
    pub sinr_min: Option<f64>,
    pub iterations: usize,
    pub termination: RowStatus,
    pub seed: u64,
}

impl ResultRow {
    pub fn solved(
        psi: f64,
        combiner: ReceiverKind,
        mode: Mode,
        objective: f64,
        sinr_min: f64,
        trace: &SolveTrace,
        seed: u64,
    ) -> Self {
        Self {
            psi,
            combiner,
            mode,
            objective_linear: Some(objective),
            objective_db: Some(to_db(objective)),
            sinr_min: Some(sinr_min),
            iterations: trace.iterations(),
            termination: trace.termination.into(),
            seed,
        }
    }

    pub fn failed(
        psi: f64,
        combiner: ReceiverKind,
        mode: Mode,
        status: RowStatus,
        seed: u64,
    ) -> Self {
        Self {
            psi,
            combiner,
            mode,
            objective_linear: None,
            objective_db: None,
            sinr_min: None,
            iterations: 0,
            termination: status,
            seed,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.objective_linear.is_some()
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub q: usize,
    pub objective_db: f64,
}

/// Row `q` holds the objective after `q` condensed GPs; row 0 is the start.
pub fn trace_rows(trace: &SolveTrace) -> Vec<TraceRow> {
    trace
        .objectives
        .iter()
        .enumerate()
        .map(|(q, o)| TraceRow {
            q,
            objective_db: to_db(*o),
        })
        .collect()
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], header: &str, out: W) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(header.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<(), csv::Error> {
    write_rows(rows, RESULT_HEADER, out)
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>, csv::Error> {
    read_rows(input)
}

pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> Result<(), csv::Error> {
    write_rows(rows, TRACE_HEADER, out)
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, csv::Error> {
    read_rows(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ResultRow> {
        vec![
            ResultRow {
                psi: 0.01,
                combiner: ReceiverKind::Mrc,
                mode: Mode::Joint,
                objective_linear: Some(14.857142857142858),
                objective_db: Some(to_db(14.857142857142858)),
                sinr_min: Some(0.010000000000123),
                iterations: 7,
                termination: RowStatus::Converged,
                seed: 3,
            },
            ResultRow::failed(
                1.5,
                ReceiverKind::Zf,
                Mode::TxOnly,
                RowStatus::Infeasible,
                3,
            ),
        ]
    }

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_results(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(RESULT_HEADER));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("0.01,mrc,joint,14.857142857142858,"));
        assert_eq!(lines.next(), Some("1.5,zf,txonly,,,,0,Infeasible,3"));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut buf = Vec::new();
        write_results(&sample(), &mut buf).unwrap();
        assert_eq!(read_results(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn trace_round_trip() {
        let rows = vec![
            TraceRow {
                q: 0,
                objective_db: 13.0,
            },
            TraceRow {
                q: 1,
                objective_db: 11.716,
            },
        ];
        let mut buf = Vec::new();
        write_trace(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("q,objective_db\n0,13.0\n"));
        assert_eq!(read_trace(buf.as_slice()).unwrap(), rows);
    }
}
