//! Planar-array steering vectors, MRT precoding and the resulting incident
//! power at every scene object.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::scene::{ArrayGeometry, ObjectKind, Scene};

/// Array response towards one direction, `M * M'` unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(pub DVector<Complex64>);

impl SteeringVector {
    pub fn entries(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Steering vector for an object at the given azimuth/elevation.
///
/// Entry `(m, m')` is `exp(j*pi*(m sin(az) sin(el) + m' cos(el)))`, flattened
/// row-major with `m'` varying fastest: index `m * M' + m'`.
pub fn steering_vector(
    azimuth_deg: f64,
    elevation_deg: f64,
    geometry: &ArrayGeometry,
) -> SteeringVector {
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    let horizontal = az.sin() * el.sin();
    let vertical = el.cos();
    let mp = geometry.mprime_count;
    SteeringVector(DVector::from_fn(geometry.element_count(), |idx, _| {
        let (m, m_prime) = (idx / mp, idx % mp);
        Complex64::from_polar(
            1.0,
            PI * (m as f64 * horizontal + m_prime as f64 * vertical),
        )
    }))
}

/// Steering vectors of every object in scene order.
pub fn scene_steering_vectors(scene: &Scene) -> Vec<SteeringVector> {
    scene
        .objects
        .iter()
        .map(|o| steering_vector(o.azimuth_deg, o.elevation_deg, &scene.geometry))
        .collect()
}

/// Transmit beam directions and per-beam powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub directions: Vec<DVector<Complex64>>,
    pub powers: Vec<f64>,
}

/// MRT directions `u_j = a_j / ||a_j||`.
pub fn mrt_precoder(targets: &[SteeringVector]) -> Vec<DVector<Complex64>> {
    targets.iter().map(|a| a.0.normalize()).collect()
}

/// Linear map from transmit powers to incident powers, `delta = C p`.
///
/// Row `i` belongs to object `i`, column `l` to target beam `l`; the entry is
/// `|a_i^H u_l|^2`. The diagonal of the target block is exactly `M * M'`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentPowerMap {
    coefficients: DMatrix<f64>,
}

impl IncidentPowerMap {
    /// Map for an MRT precoder aimed at the scene's targets.
    pub fn for_scene(scene: &Scene) -> Self {
        let steering = scene_steering_vectors(scene);
        let n = scene.target_count();
        let directions = mrt_precoder(&steering[..n]);
        let gain = scene.geometry.element_count() as f64;
        let coefficients = DMatrix::from_fn(steering.len(), n, |i, l| {
            if i == l && scene.objects[i].kind == ObjectKind::Target {
                gain
            } else {
                steering[i].0.dotc(&directions[l]).norm_sqr()
            }
        });
        Self { coefficients }
    }

    pub fn from_coefficients(coefficients: DMatrix<f64>) -> Self {
        Self { coefficients }
    }

    /// `(N + N') x N` coefficient matrix.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn coefficient(&self, object: usize, beam: usize) -> f64 {
        self.coefficients[(object, beam)]
    }

    pub fn object_count(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn beam_count(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Incident powers for the given beam powers.
    pub fn apply(&self, powers: &[f64]) -> Vec<f64> {
        assert_eq!(powers.len(), self.beam_count());
        (0..self.object_count())
            .map(|i| {
                powers
                    .iter()
                    .enumerate()
                    .map(|(l, p)| self.coefficients[(i, l)] * p)
                    .sum()
            })
            .collect()
    }
}

/// Incident power `E|a_i^H s|^2` at every object for independent symbols.
pub fn incident_powers(scene: &Scene, precoder: &Precoder) -> Vec<f64> {
    let steering = scene_steering_vectors(scene);
    let gain = scene.geometry.element_count() as f64;
    steering
        .iter()
        .enumerate()
        .map(|(i, a)| {
            precoder
                .directions
                .iter()
                .zip(&precoder.powers)
                .enumerate()
                .map(|(l, (u, p))| {
                    if i == l && scene.objects[i].kind == ObjectKind::Target {
                        gain * p
                    } else {
                        p * a.0.dotc(u).norm_sqr()
                    }
                })
                .sum()
        })
        .collect()
}

/// MRT precoder for the scene's targets with the given powers.
pub fn scene_mrt_precoder(scene: &Scene, powers: &[f64]) -> Precoder {
    let steering = scene_steering_vectors(scene);
    Precoder {
        directions: mrt_precoder(&steering[..scene.target_count()]),
        powers: powers.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures::two_target_scene;
    use crate::scene::SceneObject;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn broadside_is_all_ones() {
        for (m, mp) in [(1, 1), (2, 3), (4, 2)] {
            let a = steering_vector(0.0, 90.0, &ArrayGeometry::new(m, mp));
            assert_eq!(a.len(), m * mp);
            for z in a.0.iter() {
                assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_element_is_one() {
        let a = steering_vector(33.0, 12.0, &ArrayGeometry::new(1, 1));
        assert_eq!(a.0.as_slice(), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn endfire_pair_alternates() {
        let a = steering_vector(90.0, 90.0, &ArrayGeometry::new(2, 1));
        assert!((a.0[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((a.0[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vertical_index_varies_fastest() {
        // az = 0 kills the horizontal phase, so only m' contributes.
        let a = steering_vector(0.0, 60.0, &ArrayGeometry::new(2, 3));
        let step = Complex64::from_polar(1.0, PI * 60f64.to_radians().cos());
        for m in 0..2 {
            for mp in 0..3 {
                let expected = step.powu(mp as u32);
                assert!((a.0[m * 3 + mp] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn steering_entries_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let geom = ArrayGeometry::new(rng.random_range(1..6), rng.random_range(1..6));
            let a = steering_vector(
                rng.random_range(-180.0..180.0),
                rng.random_range(-90.0..90.0),
                &geom,
            );
            for z in a.0.iter() {
                assert!((z.norm() - 1.0).abs() < 1e-12);
            }
            let n = geom.element_count() as f64;
            assert!((a.0.norm_squared() - n).abs() <= 1e-9 * n);
        }
    }

    #[test]
    fn mrt_normalizes_and_aligns() {
        let geom = ArrayGeometry::new(2, 2);
        let ones = steering_vector(0.0, 90.0, &geom);
        let u = &mrt_precoder(&[ones])[0];
        for z in u.iter() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        let a = steering_vector(20.0, 40.0, &geom);
        let u = &mrt_precoder(std::slice::from_ref(&a))[0];
        assert!((u.norm() - 1.0).abs() < 1e-12);
        let inner = u.dotc(&a.0);
        assert!((inner - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn single_target_gets_full_array_gain() {
        let mut scene = two_target_scene(1);
        scene.objects.truncate(1);
        scene.sinr_demands.truncate(1);
        let precoder = scene_mrt_precoder(&scene, &[1.0]);
        assert_eq!(incident_powers(&scene, &precoder), vec![4.0]);
        let map = IncidentPowerMap::for_scene(&scene);
        assert_eq!(map.apply(&[2.5]), vec![10.0]);
    }

    #[test]
    fn orthogonal_clutter_sees_nothing() {
        // Two-element horizontal array: broadside target [1, 1] and end-fire
        // clutter [1, -1] are orthogonal.
        let mut scene = two_target_scene(1);
        scene.geometry = ArrayGeometry::new(2, 1);
        scene.objects = vec![
            SceneObject::target(0.0, 90.0, 1.0),
            SceneObject::clutter(90.0, 90.0, 1.0),
        ];
        scene.sinr_demands = vec![1.0];
        let precoder = scene_mrt_precoder(&scene, &[3.0]);
        let delta = incident_powers(&scene, &precoder);
        assert!((delta[0] - 6.0).abs() < 1e-12);
        assert!(delta[1].abs() < 1e-24);
    }

    #[test]
    fn map_matches_direct_evaluation_and_is_homogeneous() {
        let scene = two_target_scene(4);
        let map = IncidentPowerMap::for_scene(&scene);
        let p = [1.3, 0.4];
        let direct = incident_powers(&scene, &scene_mrt_precoder(&scene, &p));
        let via_map = map.apply(&p);
        for (a, b) in direct.iter().zip(&via_map) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        let scaled = map.apply(&[p[0] * 7.0, p[1] * 7.0]);
        for (a, b) in via_map.iter().zip(&scaled) {
            assert!((b - 7.0 * a).abs() <= 1e-12 * b.abs());
        }
        for j in 0..2 {
            assert!(via_map[j] >= 4.0 * p[j]);
        }
        assert!(map.coefficients().iter().all(|&c| c >= 0.0));
    }
}
