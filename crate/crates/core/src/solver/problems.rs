//! The power-allocation problems: joint transmit power and amplification
//! under MRC, and transmit power only with every sensor at full gain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sp::{find_feasible_start, solve_sp, RatioConstraint, SolveTrace, SpOptions, SpProblem};
use super::SolveError;
use crate::algebra::{
    build_mrc_sinr_fixed_amplification, build_mrc_sinr_signomial, Assignment, Monomial, Posynomial,
    VarId,
};
use crate::beamforming::IncidentPowerMap;
use crate::scene::{ChannelSet, Scene};
use crate::signal::{equivalent_channels, mrc_combiner, sinr, zf_combiner, Combiner};

/// Positivity floor standing in for `x >= 0`.
pub const VARIABLE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Mrc,
    Zf,
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReceiverKind::Mrc => "mrc",
            ReceiverKind::Zf => "zf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Transmit powers and amplifications; MRC only.
    Joint,
    /// Transmit powers only, amplifications at `alpha_max`.
    TxOnly,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Joint => "joint",
            Mode::TxOnly => "txonly",
        })
    }
}

fn power_sum(targets: usize) -> Posynomial {
    Posynomial::from_terms((0..targets).map(|j| Monomial::var(VarId::power(j))))
        .expect("unit coefficients")
}

fn power_bounds(scene: &Scene) -> BTreeMap<VarId, (f64, f64)> {
    (0..scene.target_count())
        .map(|j| (VarId::power(j), (VARIABLE_FLOOR, scene.p_max)))
        .collect()
}

fn sum_power_cap(scene: &Scene) -> Posynomial {
    power_sum(scene.target_count()).scale(1.0 / scene.p_max)
}

/// Minimize `sum p + sum alpha` subject to every MRC SINR demand, the sum
/// power cap, and `alpha <= alpha_max`.
pub fn build_joint_mrc_problem(scene: &Scene, channels: &ChannelSet) -> SpProblem {
    let map = IncidentPowerMap::for_scene(scene);
    let k_count = scene.sensors.sensor_count;
    let amplification_sum =
        Posynomial::from_terms((0..k_count).map(|k| Monomial::var(VarId::amplification(k))))
            .expect("unit coefficients");
    let ratio_constraints = (0..scene.target_count())
        .map(|j| {
            let (numerator, denominator) = build_mrc_sinr_signomial(j, scene, channels, &map)
                .ratio_constraint(scene.sinr_demands[j]);
            RatioConstraint {
                numerator,
                denominator,
            }
        })
        .collect();
    let mut bounds = power_bounds(scene);
    bounds.extend((0..k_count).map(|k| {
        (
            VarId::amplification(k),
            (VARIABLE_FLOOR, scene.sensors.alpha_max),
        )
    }));
    SpProblem {
        objective: power_sum(scene.target_count()).add(&amplification_sum),
        ratio_constraints,
        constraints: vec![sum_power_cap(scene)],
        bounds,
    }
}

/// Minimize `sum p + K alpha_max` with every amplification fixed at
/// `alpha_max`. The constant stays in the objective so both modes report the
/// same quantity.
pub fn build_txonly_problem(
    scene: &Scene,
    channels: &ChannelSet,
    combiner: ReceiverKind,
) -> Result<SpProblem, SolveError> {
    let map = IncidentPowerMap::for_scene(scene);
    let k_count = scene.sensors.sensor_count;
    let alphas = vec![scene.sensors.alpha_max; k_count];
    let ratio_constraints = match combiner {
        ReceiverKind::Mrc => (0..scene.target_count())
            .map(|j| {
                let (numerator, denominator) =
                    build_mrc_sinr_fixed_amplification(j, scene, channels, &map, &alphas)
                        .ratio_constraint(scene.sinr_demands[j]);
                RatioConstraint {
                    numerator,
                    denominator,
                }
            })
            .collect(),
        ReceiverKind::Zf => {
            let eq = equivalent_channels(channels, &alphas, scene.sensors.sensor_noise_var);
            let zf = zf_combiner(&eq)?;
            let q = scene.response_powers();
            zf.columns
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    // v_j^H w_i = 0 for i != j, so only noise remains.
                    let noise = v.dotc(&(&eq.noise_cov_sensor * v)).re
                        + scene.fusion.fc_noise_var * v.norm_squared();
                    let gain = q[j] * v.dotc(&eq.w[j]).norm_sqr();
                    let denominator = Posynomial::from_terms((0..map.beam_count()).map(|l| {
                        Monomial::constant(gain * map.coefficient(j, l)).with(VarId::power(l), 1.0)
                    }))?;
                    Ok(RatioConstraint {
                        numerator: Posynomial::monomial(Monomial::constant(
                            scene.sinr_demands[j] * noise,
                        ))?,
                        denominator,
                    })
                })
                .collect::<Result<Vec<_>, SolveError>>()?
        }
    };
    let offset =
        Posynomial::monomial(Monomial::constant(k_count as f64 * scene.sensors.alpha_max))?;
    Ok(SpProblem {
        objective: power_sum(scene.target_count()).add(&offset),
        ratio_constraints,
        constraints: vec![sum_power_cap(scene)],
        bounds: power_bounds(scene),
    })
}

/// Outcome of one allocation solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub powers: Vec<f64>,
    pub amplifications: Vec<f64>,
    pub objective: f64,
    /// Achieved SINR per target, evaluated with the general combiner formula.
    pub sinrs: Vec<f64>,
    pub trace: SolveTrace,
}

impl Allocation {
    pub fn sinr_min(&self) -> f64 {
        self.sinrs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn achieved_sinrs(
    scene: &Scene,
    channels: &ChannelSet,
    combiner: ReceiverKind,
    powers: &[f64],
    alphas: &[f64],
) -> Result<Vec<f64>, SolveError> {
    let eq = equivalent_channels(channels, alphas, scene.sensors.sensor_noise_var);
    let comb: Combiner = match combiner {
        ReceiverKind::Mrc => mrc_combiner(&eq),
        ReceiverKind::Zf => zf_combiner(&eq)?,
    };
    let deltas = IncidentPowerMap::for_scene(scene).apply(powers);
    let q = scene.response_powers();
    Ok((0..scene.target_count())
        .map(|j| sinr(j, &comb, &eq, &deltas, &q, scene.fusion.fc_noise_var))
        .collect())
}

fn finish(
    scene: &Scene,
    channels: &ChannelSet,
    combiner: ReceiverKind,
    point: &Assignment,
    trace: SolveTrace,
    alphas: Option<Vec<f64>>,
) -> Result<Allocation, SolveError> {
    let powers = point.powers(scene.target_count());
    let amplifications = alphas.unwrap_or_else(|| point.amplifications(scene.sensors.sensor_count));
    let sinrs = achieved_sinrs(scene, channels, combiner, &powers, &amplifications)?;
    Ok(Allocation {
        objective: trace.final_objective(),
        powers,
        amplifications,
        sinrs,
        trace,
    })
}

/// Builds and solves the requested problem for the demands in `scene`.
///
/// The joint problem is solved twice: from the default start and from the
/// fixed-amplification optimum, which is feasible for it. The better result
/// is kept, so the joint objective never exceeds the fixed one.
pub fn solve_allocation(
    scene: &Scene,
    channels: &ChannelSet,
    combiner: ReceiverKind,
    mode: Mode,
    options: &SpOptions,
) -> Result<Allocation, SolveError> {
    let alpha_max = vec![scene.sensors.alpha_max; scene.sensors.sensor_count];
    let fixed = || -> Result<(Assignment, SolveTrace), SolveError> {
        let problem = build_txonly_problem(scene, channels, combiner)?;
        let start = find_feasible_start(&problem, scene, options)?;
        solve_sp(&problem, &start, options)
    };
    match (mode, combiner) {
        (Mode::TxOnly, _) => {
            let (point, trace) = fixed()?;
            finish(scene, channels, combiner, &point, trace, Some(alpha_max))
        }
        (Mode::Joint, ReceiverKind::Zf) => Err(SolveError::InvalidProblem(
            "joint optimization is defined for MRC only".into(),
        )),
        (Mode::Joint, ReceiverKind::Mrc) => {
            let problem = build_joint_mrc_problem(scene, channels);
            let from_default = find_feasible_start(&problem, scene, options)
                .and_then(|start| solve_sp(&problem, &start, options));
            let from_fixed = fixed().and_then(|(point, _)| {
                let mut start = point;
                for (k, a) in alpha_max.iter().enumerate() {
                    start.insert(VarId::amplification(k), *a);
                }
                solve_sp(&problem, &start, options)
            });
            let (point, trace) = match (from_default, from_fixed) {
                (Ok(a), Ok(b)) => {
                    if b.1.final_objective() < a.1.final_objective() {
                        b
                    } else {
                        a
                    }
                }
                (Ok(a), Err(_)) => a,
                (Err(_), Ok(b)) => b,
                (Err(e), Err(_)) => return Err(e),
            };
            finish(scene, channels, combiner, &point, trace, None)
        }
    }
}
