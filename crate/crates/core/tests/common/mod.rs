#![allow(dead_code)]

use rand::Rng;
use rfsense::algebra::{Assignment, Monomial, Posynomial, VarId};
use rfsense::scene::{ArrayGeometry, FusionCenter, Scene, SceneObject, SensorNetwork};

pub struct SceneLimits {
    pub max_targets: usize,
    pub max_clutters: usize,
    pub max_sensors: usize,
    pub max_antennas: usize,
}

/// Random valid scene with equal sensor and fusion noise.
pub fn random_scene(rng: &mut impl Rng, limits: &SceneLimits) -> Scene {
    let targets = rng.random_range(1..=limits.max_targets);
    let clutters = rng.random_range(0..=limits.max_clutters);
    let mut objects = Vec::new();
    for i in 0..targets + clutters {
        let az = rng.random_range(0.0..90.0);
        let el = rng.random_range(0.0..90.0);
        let q = rng.random_range(0.5..2.0);
        objects.push(if i < targets {
            SceneObject::target(az, el, q)
        } else {
            SceneObject::clutter(az, el, q)
        });
    }
    let noise = rng.random_range(0.1..1.0);
    Scene {
        geometry: ArrayGeometry::new(rng.random_range(1..=3), rng.random_range(1..=3)),
        objects,
        sensors: SensorNetwork {
            sensor_count: rng.random_range(1..=limits.max_sensors),
            alpha_max: rng.random_range(0.5..3.0),
            sensor_noise_var: noise,
        },
        fusion: FusionCenter {
            antenna_count: rng.random_range(1..=limits.max_antennas),
            fc_noise_var: noise,
        },
        p_max: 100.0,
        sinr_demands: (0..targets).map(|_| rng.random_range(0.05..1.0)).collect(),
    }
}

/// Random posynomial over the first `vars` power variables with exponents in [-1, 1].
pub fn random_posynomial(rng: &mut impl Rng, vars: usize, max_terms: usize) -> Posynomial {
    let terms = rng.random_range(1..=max_terms);
    Posynomial::from_terms((0..terms).map(|_| {
        let mut m = Monomial::constant(rng.random_range(0.1..2.0));
        for v in 0..vars {
            if rng.random_bool(0.7) {
                m = m.with(VarId::power(v), rng.random_range(-1.0..1.0));
            }
        }
        m
    }))
    .unwrap()
}

pub fn point(values: &[f64]) -> Assignment {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (VarId::power(i), *v))
        .collect()
}

/// Log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Per-term evaluation with precomputed axis powers, for brute-force grids
/// over power variables.
pub struct GridPosynomial {
    /// terms x axes x grid index
    tables: Vec<Vec<Vec<f64>>>,
    coefficients: Vec<f64>,
}

impl GridPosynomial {
    pub fn new(p: &Posynomial, axes: &[Vec<f64>]) -> Self {
        let tables = p
            .terms()
            .iter()
            .map(|t| {
                axes.iter()
                    .enumerate()
                    .map(|(v, grid)| {
                        let e = t.exponent(VarId::power(v));
                        grid.iter().map(|x| x.powf(e)).collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            tables,
            coefficients: p.terms().iter().map(|t| t.coefficient()).collect(),
        }
    }

    pub fn eval(&self, idx: &[usize]) -> f64 {
        self.tables
            .iter()
            .zip(&self.coefficients)
            .map(|(axes, c)| {
                axes.iter()
                    .zip(idx)
                    .fold(*c, |acc, (table, i)| acc * table[*i])
            })
            .sum()
    }
}
