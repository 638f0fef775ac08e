//! Solver results against brute-force grids and direct constraint checks.

mod common;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{log_grid, point, random_posynomial, random_scene, SceneLimits};
use rfsense::algebra::{Monomial, Posynomial, VarId};
use rfsense::beamforming::IncidentPowerMap;
use rfsense::scene::{generate_channels, Scene};
use rfsense::signal::{equivalent_channels, mrc_combiner, mrc_sinr_closed_form, sinr, zf_combiner};
use rfsense::solver::{
    build_joint_mrc_problem, find_feasible_start, solve_allocation, solve_gp, GpOptions, GpProblem,
    Mode, ReceiverKind, SolveError, SpOptions, START_FEASIBILITY_SLACK,
};

/// Minimizes `objective` over a log grid, then zooms in around the best
/// point three times. `None` if no grid point is feasible.
fn zoom_search(
    bounds: &[(f64, f64)],
    per_axis: usize,
    feasible: impl Fn(&[f64]) -> bool,
    objective: impl Fn(&[f64]) -> f64,
) -> Option<(f64, Vec<f64>)> {
    let mut boxes: Vec<(f64, f64)> = bounds.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..4 {
        let axes: Vec<Vec<f64>> = boxes
            .iter()
            .map(|&(lo, hi)| log_grid(lo, hi, per_axis))
            .collect();
        let total = per_axis.pow(axes.len() as u32);
        let mut x = vec![0.0; axes.len()];
        for flat in 0..total {
            let mut rest = flat;
            for (slot, axis) in x.iter_mut().zip(&axes) {
                *slot = axis[rest % per_axis];
                rest /= per_axis;
            }
            if feasible(&x) {
                let v = objective(&x);
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, x.clone()));
                }
            }
        }
        let (_, centre) = best.as_ref()?;
        boxes = boxes
            .iter()
            .zip(&axes)
            .zip(centre)
            .map(|((&(lo, hi), axis), &c)| {
                let ratio = (axis[1] / axis[0]).powi(2);
                ((c / ratio).max(lo), (c * ratio).min(hi))
            })
            .collect();
    }
    best
}

#[test]
fn gp_active_constraint() {
    let p = VarId::power(0);
    let problem = GpProblem {
        objective: Posynomial::monomial(Monomial::var(p)).unwrap(),
        constraints: vec![Posynomial::monomial(Monomial::constant(0.5).with(p, -1.0)).unwrap()],
        bounds: BTreeMap::from([(p, (1e-6, 100.0))]),
    };
    let sol = solve_gp(&problem, &GpOptions::default()).unwrap();
    assert!((sol.assignment.get(p).unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn gp_random_two_variable_problems_match_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..20 {
        let bounds: BTreeMap<VarId, (f64, f64)> =
            (0..2).map(|v| (VarId::power(v), (0.25, 4.0))).collect();
        let objective = random_posynomial(&mut rng, 2, 3);
        let c = random_posynomial(&mut rng, 2, 3);
        let at = c.evaluate(&point(&[1.0, 1.0])).unwrap();
        let problem = GpProblem {
            objective: objective.clone(),
            constraints: vec![c.scale(0.8 / at)],
            bounds,
        };
        let sol = solve_gp(&problem, &GpOptions::default()).unwrap();
        let (grid, _) = zoom_search(
            &[(0.25, 4.0), (0.25, 4.0)],
            200,
            |x| problem.constraints[0].evaluate(&point(x)).unwrap() <= 1.0,
            |x| objective.evaluate(&point(x)).unwrap(),
        )
        .unwrap();
        assert!(
            (sol.objective - grid).abs() <= 0.01 * grid,
            "case {case}: solver {} grid {grid}",
            sol.objective
        );
    }
}

fn single_target_scene(rng: &mut ChaCha8Rng, sensors: usize) -> Scene {
    let limits = SceneLimits {
        max_targets: 1,
        max_clutters: 0,
        max_sensors: 1,
        max_antennas: 3,
    };
    let mut scene = random_scene(rng, &limits);
    scene.sensors.sensor_count = sensors;
    scene
}

#[test]
fn joint_mrc_single_target_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for sensors in [2, 3] {
        for case in 0..3 {
            let scene = single_target_scene(&mut rng, sensors);
            let channels = generate_channels(&scene, rng.random());
            let alloc = match solve_allocation(
                &scene,
                &channels,
                ReceiverKind::Mrc,
                Mode::Joint,
                &SpOptions::default(),
            ) {
                Ok(a) => a,
                Err(SolveError::Infeasible(_)) => continue,
                Err(e) => panic!("K={sensors} case {case}: {e}"),
            };
            // one target, no clutter: SINR is proportional to p, so the
            // cheapest feasible p for given alphas is psi / SINR(p = 1)
            let psi = scene.sinr_demands[0];
            let min_power = |alphas: &[f64]| {
                psi / mrc_sinr_closed_form(0, &[1.0], alphas, &scene, &channels).unwrap()
            };
            let bounds = vec![(1e-4, scene.sensors.alpha_max); sensors];
            let (grid, at) = zoom_search(
                &bounds,
                30,
                |a| min_power(a) <= scene.p_max,
                |a| min_power(a) + a.iter().sum::<f64>(),
            )
            .expect("solver found a feasible point");
            assert!(
                (alloc.objective - grid).abs() <= 0.01 * grid,
                "K={sensors} case {case}: solver {} grid {grid} at {at:?}",
                alloc.objective
            );
        }
    }
}

#[test]
fn txonly_matches_grid_over_powers() {
    let limits = SceneLimits {
        max_targets: 2,
        max_clutters: 1,
        max_sensors: 3,
        max_antennas: 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut compared = 0;
    while compared < 6 {
        let mut scene = random_scene(&mut rng, &limits);
        if scene.target_count() != 2 {
            continue;
        }
        scene.sensors.alpha_max = rng.random_range(0.5..1.0);
        let channels = generate_channels(&scene, rng.random());
        let alphas = vec![scene.sensors.alpha_max; scene.sensors.sensor_count];
        let eq = equivalent_channels(&channels, &alphas, scene.sensors.sensor_noise_var);
        let map = IncidentPowerMap::for_scene(&scene);
        let q = scene.response_powers();
        let offset: f64 = alphas.iter().sum();
        for kind in [ReceiverKind::Mrc, ReceiverKind::Zf] {
            let combiner = match kind {
                ReceiverKind::Mrc => mrc_combiner(&eq),
                ReceiverKind::Zf => match zf_combiner(&eq) {
                    Ok(c) => c,
                    Err(_) => continue,
                },
            };
            let alloc = match solve_allocation(
                &scene,
                &channels,
                kind,
                Mode::TxOnly,
                &SpOptions::default(),
            ) {
                Ok(a) => a,
                Err(SolveError::Infeasible(_)) => continue,
                Err(e) => panic!("{kind}: {e}"),
            };
            let feasible = |p: &[f64]| {
                let deltas = map.apply(p);
                p.iter().sum::<f64>() <= scene.p_max
                    && (0..2).all(|j| {
                        sinr(j, &combiner, &eq, &deltas, &q, scene.fusion.fc_noise_var)
                            >= scene.sinr_demands[j]
                    })
            };
            let (grid, _) = zoom_search(&[(1e-4, scene.p_max); 2], 200, feasible, |p| {
                p.iter().sum::<f64>() + offset
            })
            .expect("solver found a feasible point");
            assert!(
                (alloc.objective - grid).abs() <= 0.01 * grid,
                "{kind}: solver {} grid {grid}",
                alloc.objective
            );
            compared += 1;
        }
    }
}

#[test]
fn feasible_start_satisfies_true_constraints() {
    let limits = SceneLimits {
        max_targets: 2,
        max_clutters: 1,
        max_sensors: 4,
        max_antennas: 4,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut found = 0;
    for _ in 0..30 {
        let mut scene = random_scene(&mut rng, &limits);
        let scale = rng.random_range(0.5..20.0);
        scene.sinr_demands.iter_mut().for_each(|d| *d *= scale);
        let channels = generate_channels(&scene, rng.random());
        let problem = build_joint_mrc_problem(&scene, &channels);
        match find_feasible_start(&problem, &scene, &SpOptions::default()) {
            Ok(x) => {
                found += 1;
                assert!(problem.max_violation(&x).unwrap() <= 1.0 + START_FEASIBILITY_SLACK);
                let p = x.powers(scene.target_count());
                let a = x.amplifications(scene.sensors.sensor_count);
                for j in 0..scene.target_count() {
                    let rho = mrc_sinr_closed_form(j, &p, &a, &scene, &channels).unwrap();
                    assert!(rho >= scene.sinr_demands[j] * (1.0 - 1e-8));
                }
            }
            Err(SolveError::Infeasible(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(found >= 10, "only {found} feasible draws");
}

#[test]
fn objective_is_monotone_in_one_demand() {
    let scene = rfsense::experiment::parse_scenario_str(rfsense::experiment::BUNDLED_SCENARIO)
        .unwrap()
        .scene;
    let channels = generate_channels(&scene, 0);
    for (kind, mode) in [
        (ReceiverKind::Mrc, Mode::Joint),
        (ReceiverKind::Mrc, Mode::TxOnly),
        (ReceiverKind::Zf, Mode::TxOnly),
    ] {
        let mut previous = 0.0;
        for step in 1..=8 {
            let mut s = scene.clone();
            s.sinr_demands = vec![0.1 * step as f64, 0.3];
            let alloc = solve_allocation(&s, &channels, kind, mode, &SpOptions::default()).unwrap();
            assert!(
                alloc.objective >= previous * (1.0 - 1e-6),
                "{kind}/{mode} at step {step}: {} after {previous}",
                alloc.objective
            );
            previous = alloc.objective;
        }
    }
}
