//! Geometric programs in log-space, solved with a barrier method.
//!
//! With `y = ln x` a posynomial `sum_k c_k x^{a_k}` becomes
//! `F(y) = ln sum_k exp(a_k . y + ln c_k)`, which is convex. The solver
//! minimizes `t F_0(y) - sum_i ln(-F_i(y))` by damped Newton steps for an
//! increasing sequence of `t` until the duality measure `m / t` is below
//! the requested tolerance. A phase-I problem in `(y, s)` with constraints
//! `F_i(y) <= s` supplies a strictly feasible start when none is given.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::SolveError;
use crate::algebra::{Assignment, Monomial, Posynomial, VarId};

/// Minimize `objective` subject to `constraint <= 1` and `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpProblem {
    pub objective: Posynomial,
    pub constraints: Vec<Posynomial>,
    pub bounds: BTreeMap<VarId, (f64, f64)>,
}

impl GpProblem {
    /// Variables of the objective, constraints and bounds, sorted.
    pub fn variables(&self) -> Vec<VarId> {
        let mut vars: Vec<VarId> = self
            .objective
            .variables()
            .into_iter()
            .chain(self.constraints.iter().flat_map(|c| c.variables()))
            .chain(self.bounds.keys().copied())
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    fn check(&self) -> Result<(), SolveError> {
        if self.objective.is_empty() {
            return Err(SolveError::InvalidProblem("empty objective".into()));
        }
        for (v, &(lo, hi)) in &self.bounds {
            if !(lo > 0.0 && lo < hi) || !hi.is_finite() {
                return Err(SolveError::InvalidProblem(format!(
                    "bounds of {v} must satisfy 0 < lo < hi < inf, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    /// Target duality measure `m / t` of the log-objective.
    pub tolerance: f64,
    /// Newton iterations allowed per centering step.
    pub max_newton_iters: usize,
    pub initial_t: f64,
    /// Factor applied to `t` after each centering step.
    pub t_growth: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_newton_iters: 200,
            initial_t: 1.0,
            t_growth: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub assignment: Assignment,
    pub objective: f64,
    pub newton_iterations: usize,
}

/// `ln sum_k exp(a_k . y + b_k)`.
#[derive(Debug, Clone)]
struct LogSumExp {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl LogSumExp {
    fn compile(p: &Posynomial, index: &BTreeMap<VarId, usize>, n: usize) -> Self {
        let terms = p.terms();
        let mut a = DMatrix::zeros(terms.len(), n);
        let mut b = DVector::zeros(terms.len());
        for (row, t) in terms.iter().enumerate() {
            b[row] = t.coefficient().ln();
            for (v, e) in t.exponents() {
                a[(row, index[v])] = *e;
            }
        }
        Self { a, b }
    }

    fn from_monomial(m: &Monomial, index: &BTreeMap<VarId, usize>, n: usize) -> Self {
        Self::compile(
            &Posynomial::monomial(m.clone()).expect("positive monomial"),
            index,
            n,
        )
    }

    /// Appends a zero column, or `coeff` for the new variable.
    fn extend(&self, coeff: f64) -> Self {
        let mut a = self.a.clone().insert_column(self.a.ncols(), 0.0);
        let last = a.ncols() - 1;
        a.column_mut(last).fill(coeff);
        Self {
            a,
            b: self.b.clone(),
        }
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let z = &self.a * y + &self.b;
        let top = z.max();
        top + z.iter().map(|zk| (zk - top).exp()).sum::<f64>().ln()
    }

    fn derivatives(&self, y: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let z = &self.a * y + &self.b;
        let top = z.max();
        let e = z.map(|zk| (zk - top).exp());
        let sum = e.sum();
        let w = e / sum;
        let grad = self.a.transpose() * &w;
        let mut weighted = self.a.clone();
        for (r, wr) in w.iter().enumerate() {
            weighted.row_mut(r).scale_mut(*wr);
        }
        let hess = self.a.transpose() * weighted - &grad * grad.transpose();
        (top + sum.ln(), grad, hess)
    }
}

/// Objective and `<= 0` constraints, all log-sum-exp in `y`.
#[derive(Debug, Clone)]
struct Compiled {
    objective: LogSumExp,
    constraints: Vec<LogSumExp>,
}

impl Compiled {
    fn dimension(&self) -> usize {
        self.objective.a.ncols()
    }

    fn strictly_feasible(&self, y: &DVector<f64>) -> bool {
        y.iter().all(|v| v.is_finite()) && self.constraints.iter().all(|c| c.value(y) < 0.0)
    }

    fn max_constraint(&self, y: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn barrier_value(&self, y: &DVector<f64>, t: f64) -> f64 {
        let mut value = t * self.objective.value(y);
        for c in &self.constraints {
            value -= (-c.value(y)).ln();
        }
        value
    }

    fn barrier_derivatives(&self, y: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let (_, g0, h0) = self.objective.derivatives(y);
        let mut grad = g0 * t;
        let mut hess = h0 * t;
        for c in &self.constraints {
            let (f, g, h) = c.derivatives(y);
            let slack = -f;
            grad += &g / slack;
            hess += h / slack + (&g * g.transpose()) / (slack * slack);
        }
        (grad, hess)
    }

    /// Newton direction, regularizing the Hessian if it is not positive definite.
    fn newton_step(hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
        let n = grad.len();
        let scale = hess.diagonal().abs().max().max(1.0);
        let mut shift = 0.0;
        for _ in 0..12 {
            let shifted = &hess + DMatrix::identity(n, n) * shift;
            if let Some(chol) = shifted.cholesky() {
                return Some(-chol.solve(grad));
            }
            shift = if shift == 0.0 {
                1e-12 * scale
            } else {
                shift * 100.0
            };
        }
        None
    }

    /// Damped Newton centering at fixed `t`. Returns the number of steps taken.
    fn centre(
        &self,
        y: &mut DVector<f64>,
        t: f64,
        options: &GpOptions,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<usize, SolveError> {
        const DECREMENT_TOL: f64 = 1e-10;
        const LOOSE_DECREMENT_TOL: f64 = 1e-6;
        const MAX_HALVINGS: usize = 40;
        for iter in 0..options.max_newton_iters {
            let (grad, hess) = self.barrier_derivatives(y, t);
            let dx = Self::newton_step(hess, &grad).ok_or_else(|| {
                SolveError::NumericalFailure(format!("singular Newton system at t = {t:.3e}"))
            })?;
            let slope = grad.dot(&dx);
            let decrement = -slope / 2.0;
            if !(decrement > DECREMENT_TOL) {
                return Ok(iter);
            }
            let current = self.barrier_value(y, t);
            // Decrements below what the merit value can resolve are noise.
            let floor = LOOSE_DECREMENT_TOL.max(1e3 * f64::EPSILON * current.abs());
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                let candidate = &*y + &dx * step;
                if self.strictly_feasible(&candidate) {
                    let value = self.barrier_value(&candidate, t);
                    if value <= current + 0.25 * step * slope {
                        *y = candidate;
                        if value >= current && decrement <= floor {
                            // no representable progress left
                            return Ok(iter + 1);
                        }
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // At large t the barrier value is dominated by rounding once
                // the decrement is this small; the point is as central as the
                // arithmetic allows.
                if decrement <= floor {
                    return Ok(iter);
                }
                return Err(SolveError::NumericalFailure(format!(
                    "line search failed after {MAX_HALVINGS} halvings (t = {t:.3e}, decrement {decrement:.3e})"
                )));
            }
            if y.iter().any(|v| v.abs() > 700.0) {
                return Err(SolveError::NumericalFailure(
                    "iterate left the representable range; objective unbounded?".into(),
                ));
            }
            if stop(y) {
                return Ok(iter + 1);
            }
        }
        Err(SolveError::NumericalFailure(format!(
            "centering did not converge in {} Newton steps (t = {t:.3e})",
            options.max_newton_iters
        )))
    }

    /// Barrier path-following from a strictly feasible `y`.
    fn minimize(
        &self,
        y: &mut DVector<f64>,
        options: &GpOptions,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<usize, SolveError> {
        let m = self.constraints.len();
        let mut t = options.initial_t;
        let mut steps = 0;
        loop {
            steps += self.centre(y, t, options, stop)?;
            if stop(y) || m == 0 || (m as f64) / t < options.tolerance {
                return Ok(steps);
            }
            t *= options.t_growth;
        }
    }
}

fn compile(problem: &GpProblem) -> (Vec<VarId>, Compiled) {
    let vars = problem.variables();
    let index: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = vars.len();
    let mut constraints: Vec<LogSumExp> = problem
        .constraints
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| LogSumExp::compile(c, &index, n))
        .collect();
    for (&v, &(lo, hi)) in &problem.bounds {
        // x / hi <= 1 and lo / x <= 1
        constraints.push(LogSumExp::from_monomial(
            &Monomial::constant(1.0 / hi).with(v, 1.0),
            &index,
            n,
        ));
        constraints.push(LogSumExp::from_monomial(
            &Monomial::constant(lo).with(v, -1.0),
            &index,
            n,
        ));
    }
    let objective = LogSumExp::compile(&problem.objective, &index, n);
    (
        vars,
        Compiled {
            objective,
            constraints,
        },
    )
}

fn default_start(vars: &[VarId], problem: &GpProblem, hint: Option<&Assignment>) -> DVector<f64> {
    DVector::from_iterator(
        vars.len(),
        vars.iter().map(|v| {
            if let Some(x) = hint.and_then(|h| h.get(*v)).filter(|x| *x > 0.0) {
                return x.ln();
            }
            match problem.bounds.get(v) {
                Some(&(lo, hi)) => 0.5 * (lo.ln() + hi.ln()),
                None => 0.0,
            }
        }),
    )
}

/// Finds `y` with every constraint strictly negative, starting from `y0`.
fn phase_one(
    problem: &Compiled,
    y0: &DVector<f64>,
    options: &GpOptions,
) -> Result<DVector<f64>, SolveError> {
    const TARGET_MARGIN: f64 = 1e-6;
    const PHASE_ONE_RADIUS: f64 = 60.0;
    let n = problem.dimension();
    // Variables (y, s): minimize s subject to F_i(y) - s <= 0 and s >= -1.
    let mut s_floor_a = DMatrix::zeros(1, n + 1);
    s_floor_a[(0, n)] = -1.0;
    let mut constraints: Vec<LogSumExp> =
        problem.constraints.iter().map(|c| c.extend(-1.0)).collect();
    constraints.push(LogSumExp {
        a: s_floor_a,
        b: DVector::from_element(1, -1.0),
    });
    // |y_i - y0_i| <= PHASE_ONE_RADIUS keeps the auxiliary problem bounded
    // when the original has free directions.
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut a = DMatrix::zeros(1, n + 1);
            a[(0, i)] = sign;
            constraints.push(LogSumExp {
                a,
                b: DVector::from_element(1, -sign * y0[i] - PHASE_ONE_RADIUS),
            });
        }
    }
    let mut obj_a = DMatrix::zeros(1, n + 1);
    obj_a[(0, n)] = 1.0;
    let aux = Compiled {
        objective: LogSumExp {
            a: obj_a,
            b: DVector::zeros(1),
        },
        constraints,
    };
    let s0 = (problem.max_constraint(y0) + 1.0).max(0.0);
    let mut z = y0.clone().insert_row(n, s0);
    let stop = |z: &DVector<f64>| z[n] < -TARGET_MARGIN;
    aux.minimize(&mut z, options, &stop)?;
    let y = z.rows(0, n).into_owned();
    if problem.strictly_feasible(&y) {
        Ok(y)
    } else {
        Err(SolveError::Infeasible(format!(
            "no strictly feasible point; smallest max constraint value {:.3e} (log scale)",
            problem.max_constraint(&y)
        )))
    }
}

pub fn solve_gp(problem: &GpProblem, options: &GpOptions) -> Result<GpSolution, SolveError> {
    solve_gp_from(problem, None, options)
}

/// Solves `problem`, using `start` as the initial point when it is strictly
/// feasible and as the phase-I seed otherwise.
pub fn solve_gp_from(
    problem: &GpProblem,
    start: Option<&Assignment>,
    options: &GpOptions,
) -> Result<GpSolution, SolveError> {
    problem.check()?;
    let (vars, compiled) = compile(problem);
    for c in &compiled.constraints {
        // constant constraints carry no barrier information
        if c.a.iter().all(|a| *a == 0.0) && c.value(&DVector::zeros(vars.len())) >= 0.0 {
            return Err(SolveError::Infeasible(
                "a constant constraint exceeds 1".into(),
            ));
        }
    }
    let y0 = default_start(&vars, problem, start);
    let mut y = if compiled.strictly_feasible(&y0) {
        y0
    } else {
        phase_one(&compiled, &y0, options)?
    };
    let newton_iterations = compiled.minimize(&mut y, options, &|_| false)?;
    let assignment: Assignment = vars
        .iter()
        .zip(y.iter())
        .map(|(v, yi)| (*v, yi.exp()))
        .collect();
    let objective = problem.objective.evaluate(&assignment)?;
    Ok(GpSolution {
        assignment,
        objective,
        newton_iterations,
    })
}
