//! Successive condensation for signomial programs.
//!
//! Each ratio constraint `N(x) / D(x) <= 1` is tightened to `N(x) / m(x) <= 1`
//! with `m` the condensed monomial of `D` at the current iterate. Since
//! `m <= D` everywhere, every GP solution is feasible for the original
//! problem, and since the current iterate is feasible for the GP, the
//! objective never increases.

use std::collections::BTreeMap;

use super::gp::{solve_gp_from, GpOptions, GpProblem};
use super::SolveError;
use crate::algebra::{condense, Assignment, Monomial, Posynomial, VarId, VarKind};
use crate::scene::Scene;

/// Slack allowed on the original constraints when accepting a start point.
pub const START_FEASIBILITY_SLACK: f64 = 1e-9;

/// `numerator / denominator <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioConstraint {
    pub numerator: Posynomial,
    pub denominator: Posynomial,
}

impl RatioConstraint {
    pub fn ratio(&self, point: &Assignment) -> Result<f64, SolveError> {
        Ok(self.numerator.evaluate(point)? / self.denominator.evaluate(point)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpProblem {
    pub objective: Posynomial,
    pub ratio_constraints: Vec<RatioConstraint>,
    /// Ordinary posynomial constraints `c(x) <= 1`.
    pub constraints: Vec<Posynomial>,
    pub bounds: BTreeMap<VarId, (f64, f64)>,
}

impl SpProblem {
    pub fn constraint_count(&self) -> usize {
        self.ratio_constraints.len() + self.constraints.len()
    }

    pub fn variables(&self) -> Vec<VarId> {
        let mut vars: Vec<VarId> = self
            .objective
            .variables()
            .into_iter()
            .chain(self.ratio_constraints.iter().flat_map(|r| {
                r.numerator
                    .variables()
                    .into_iter()
                    .chain(r.denominator.variables())
            }))
            .chain(self.constraints.iter().flat_map(|c| c.variables()))
            .chain(self.bounds.keys().copied())
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn objective_value(&self, point: &Assignment) -> Result<f64, SolveError> {
        Ok(self.objective.evaluate(point)?)
    }

    /// Largest constraint value at `point`, bounds included as `x / hi` and
    /// `lo / x`. The point is feasible iff this is at most 1.
    pub fn max_violation(&self, point: &Assignment) -> Result<f64, SolveError> {
        let mut worst = f64::NEG_INFINITY;
        for r in &self.ratio_constraints {
            worst = worst.max(r.ratio(point)?);
        }
        for c in &self.constraints {
            worst = worst.max(c.evaluate(point)?);
        }
        for (&v, &(lo, hi)) in &self.bounds {
            let x = point
                .get(v)
                .ok_or(crate::algebra::AlgebraError::UnboundVariable(v))?;
            worst = worst.max(x / hi).max(lo / x);
        }
        Ok(worst)
    }

    /// The GP obtained by condensing every denominator at `point`, plus the
    /// condensation weights used.
    pub fn condensed_at(
        &self,
        point: &Assignment,
    ) -> Result<(GpProblem, Vec<Vec<f64>>), SolveError> {
        let mut constraints = Vec::with_capacity(self.constraint_count());
        let mut weights = Vec::with_capacity(self.ratio_constraints.len());
        for r in &self.ratio_constraints {
            let c = condense(&r.denominator, point)?;
            constraints.push(r.numerator.div_monomial(&c.monomial));
            weights.push(c.weights);
        }
        constraints.extend(self.constraints.iter().cloned());
        Ok((
            GpProblem {
                objective: self.objective.clone(),
                constraints,
                bounds: self.bounds.clone(),
            },
            weights,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpOptions {
    /// Stop when the relative objective change drops below this.
    pub rel_tol: f64,
    pub max_outer_iters: usize,
    pub gp: GpOptions,
}

impl Default for SpOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_outer_iters: 50,
            gp: GpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Infeasible,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "Converged",
            Termination::MaxIterations => "MaxIterations",
            Termination::Infeasible => "Infeasible",
        })
    }
}

/// Iterates of one successive-condensation run. Entry 0 is the start point;
/// entry `q` is the solution of the `q`-th condensed GP.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub objectives: Vec<f64>,
    pub assignments: Vec<Assignment>,
    /// Condensation weights used for GP `q` (index `q - 1`), one list per ratio constraint.
    pub weights: Vec<Vec<Vec<f64>>>,
    pub termination: Termination,
}

impl SolveTrace {
    /// Number of condensed GPs solved.
    pub fn iterations(&self) -> usize {
        self.objectives.len().saturating_sub(1)
    }

    pub fn final_objective(&self) -> f64 {
        *self.objectives.last().expect("trace holds the start point")
    }

    pub fn objectives_db(&self) -> Vec<f64> {
        self.objectives.iter().map(|o| 10.0 * o.log10()).collect()
    }

    /// First iteration whose relative objective change is below `rel_tol`.
    pub fn iterations_to(&self, rel_tol: f64) -> Option<usize> {
        self.objectives
            .windows(2)
            .position(|w| (w[0] - w[1]).abs() < rel_tol * w[0].abs())
            .map(|q| q + 1)
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.objectives.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Successive condensation from a feasible `start`.
pub fn solve_sp(
    problem: &SpProblem,
    start: &Assignment,
    options: &SpOptions,
) -> Result<(Assignment, SolveTrace), SolveError> {
    let worst = problem.max_violation(start)?;
    if !(worst <= 1.0 + START_FEASIBILITY_SLACK) {
        return Err(SolveError::StartInfeasible { max_ratio: worst });
    }
    let mut current = start.clone();
    let mut objective = problem.objective_value(&current)?;
    let mut trace = SolveTrace {
        objectives: vec![objective],
        assignments: vec![current.clone()],
        weights: Vec::new(),
        termination: Termination::MaxIterations,
    };
    for _ in 0..options.max_outer_iters {
        let (gp, weights) = problem.condensed_at(&current)?;
        let solution = solve_gp_from(&gp, Some(&current), &options.gp)?;
        if solution.objective > objective {
            // The current point was already optimal for this GP up to the
            // solver's tolerance.
            trace.termination = Termination::Converged;
            break;
        }
        let change = (objective - solution.objective) / objective.abs();
        current = solution.assignment;
        objective = solution.objective;
        trace.objectives.push(objective);
        trace.assignments.push(current.clone());
        trace.weights.push(weights);
        if change < options.rel_tol {
            trace.termination = Termination::Converged;
            break;
        }
    }
    Ok((current, trace))
}

/// Start point for [`solve_sp`].
///
/// Tries every transmit power at `p_max / N` and every amplification at
/// `alpha_max`. If that violates a ratio constraint, maximizes a common slack
/// `s` on the ratio constraints (`s N / D <= 1`) by successive condensation
/// and accepts the result once `s >= 1`.
pub fn find_feasible_start(
    problem: &SpProblem,
    scene: &Scene,
    options: &SpOptions,
) -> Result<Assignment, SolveError> {
    let targets = scene.target_count().max(1) as f64;
    let nominal: Assignment = problem
        .variables()
        .into_iter()
        .map(|v| {
            let value = match v.kind {
                VarKind::TxPower => scene.p_max / targets,
                VarKind::Amplification => scene.sensors.alpha_max,
                VarKind::Slack => 1.0,
            };
            (v, value)
        })
        .collect();
    let worst = problem.max_violation(&nominal)?;
    if worst <= 1.0 + START_FEASIBILITY_SLACK {
        return Ok(nominal);
    }
    let ratio_worst = problem
        .ratio_constraints
        .iter()
        .map(|r| r.ratio(&nominal))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let plain_worst = problem
        .constraints
        .iter()
        .map(|c| c.evaluate(&nominal))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if plain_worst > 1.0 + START_FEASIBILITY_SLACK {
        return Err(SolveError::Infeasible(
            "nominal start violates a posynomial constraint".into(),
        ));
    }

    let slack = VarId::slack(0);
    let s0 = 1.0 / ratio_worst;
    let slack_var = Monomial::var(slack);
    let mut bounds = problem.bounds.clone();
    bounds.insert(slack, (s0 * 1e-3, 2.0));
    let phase_one = SpProblem {
        objective: Posynomial::monomial(Monomial::constant(1.0).with(slack, -1.0))?,
        ratio_constraints: problem
            .ratio_constraints
            .iter()
            .map(|r| RatioConstraint {
                numerator: r
                    .numerator
                    .mul(&Posynomial::monomial(slack_var.clone()).expect("unit monomial")),
                denominator: r.denominator.clone(),
            })
            .collect(),
        constraints: problem.constraints.clone(),
        bounds,
    };
    let mut start = nominal;
    start.insert(slack, s0);
    let (point, _) = solve_sp(&phase_one, &start, options)?;
    let best_slack = point.get(slack).unwrap_or(0.0);
    if best_slack < 1.0 {
        return Err(SolveError::Infeasible(format!(
            "demands unreachable: best common slack {best_slack:.4} < 1"
        )));
    }
    let candidate: Assignment = point
        .iter()
        .filter(|(v, _)| v.kind != VarKind::Slack)
        .collect();
    let worst = problem.max_violation(&candidate)?;
    if worst <= 1.0 + START_FEASIBILITY_SLACK {
        Ok(candidate)
    } else {
        Err(SolveError::Infeasible(format!(
            "phase-I point violates constraints (max ratio {worst:.6})"
        )))
    }
}
