//! Problem instance: transmit array, scene objects, sensors and fusion center,
//! plus the random channel realizations that connect them.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Planar transmit array with half-wavelength spacing in both dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    /// Horizontal element count.
    pub m_count: usize,
    /// Vertical element count.
    pub mprime_count: usize,
}

impl ArrayGeometry {
    pub fn new(m_count: usize, mprime_count: usize) -> Self {
        Self {
            m_count,
            mprime_count,
        }
    }

    /// Total number of elements, which is also the MRT array gain.
    pub fn element_count(&self) -> usize {
        self.m_count * self.mprime_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Target,
    Clutter,
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectKind::Target => f.write_str("target"),
            ObjectKind::Clutter => f.write_str("clutter"),
        }
    }
}

/// A passive reflector seen from the transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneObject {
    pub kind: ObjectKind,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Second-order moment of the reflection response.
    pub response_power: f64,
}

impl SceneObject {
    pub fn target(azimuth_deg: f64, elevation_deg: f64, response_power: f64) -> Self {
        Self {
            kind: ObjectKind::Target,
            azimuth_deg,
            elevation_deg,
            response_power,
        }
    }

    pub fn clutter(azimuth_deg: f64, elevation_deg: f64, response_power: f64) -> Self {
        Self {
            kind: ObjectKind::Clutter,
            azimuth_deg,
            elevation_deg,
            response_power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorNetwork {
    pub sensor_count: usize,
    /// Per-sensor amplification cap.
    pub alpha_max: f64,
    pub sensor_noise_var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionCenter {
    pub antenna_count: usize,
    pub fc_noise_var: f64,
}

/// Full problem instance. Targets always precede clutters in `objects`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub geometry: ArrayGeometry,
    pub objects: Vec<SceneObject>,
    pub sensors: SensorNetwork,
    pub fusion: FusionCenter,
    pub p_max: f64,
    pub sinr_demands: Vec<f64>,
}

/// One violated scene invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyArray,
    NoTargets,
    /// A clutter appears before a target.
    ObjectOrder {
        index: usize,
    },
    NonPositiveResponse {
        index: usize,
        value: f64,
    },
    NonFiniteAngle {
        index: usize,
    },
    NoSensors,
    NonPositiveAlphaMax(f64),
    NonPositiveSensorNoise(f64),
    NoFusionAntennas,
    NonPositiveFusionNoise(f64),
    NonPositivePowerCap(f64),
    DemandCount {
        demands: usize,
        targets: usize,
    },
    NonPositiveDemand {
        index: usize,
        value: f64,
    },
    /// Zero-forcing needs at least as many stacked dimensions as objects.
    ZfDimension {
        dimensions: usize,
        objects: usize,
    },
}

impl Violation {
    /// Warnings do not make the scene unusable; they only rule out ZF.
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::ZfDimension { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyArray => {
                write!(f, "array must have at least one element per dimension")
            }
            Violation::NoTargets => write!(f, "scene has no targets"),
            Violation::ObjectOrder { index } => {
                write!(f, "object {index} is a target listed after a clutter")
            }
            Violation::NonPositiveResponse { index, value } => {
                write!(f, "object {index} has non-positive response power {value}")
            }
            Violation::NonFiniteAngle { index } => {
                write!(f, "object {index} has a non-finite angle")
            }
            Violation::NoSensors => write!(f, "sensor count must be at least 1"),
            Violation::NonPositiveAlphaMax(v) => write!(f, "alpha_max must be positive, got {v}"),
            Violation::NonPositiveSensorNoise(v) => {
                write!(f, "sensor noise variance must be positive, got {v}")
            }
            Violation::NoFusionAntennas => write!(f, "fusion center needs at least one antenna"),
            Violation::NonPositiveFusionNoise(v) => {
                write!(f, "fusion-center noise variance must be positive, got {v}")
            }
            Violation::NonPositivePowerCap(v) => write!(f, "p_max must be positive, got {v}"),
            Violation::DemandCount { demands, targets } => {
                write!(f, "{demands} SINR demands given for {targets} targets")
            }
            Violation::NonPositiveDemand { index, value } => {
                write!(f, "SINR demand {index} must be positive, got {value}")
            }
            Violation::ZfDimension {
                dimensions,
                objects,
            } => write!(
                f,
                "warning: K*R = {dimensions} < {objects} objects, zero-forcing is not applicable"
            ),
        }
    }
}

impl Scene {
    pub fn target_count(&self) -> usize {
        self.objects
            .iter()
            .filter(|o| o.kind == ObjectKind::Target)
            .count()
    }

    pub fn clutter_count(&self) -> usize {
        self.objects.len() - self.target_count()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn response_powers(&self) -> Vec<f64> {
        self.objects.iter().map(|o| o.response_power).collect()
    }

    /// Copy of the scene with every target demanding the same SINR.
    pub fn with_uniform_demand(&self, psi: f64) -> Scene {
        let mut scene = self.clone();
        scene.sinr_demands = vec![psi; self.target_count()];
        scene
    }

    /// Every violated invariant. Returns an empty list for a valid scene;
    /// entries with [`Violation::is_warning`] may be present on usable scenes.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.geometry.m_count == 0 || self.geometry.mprime_count == 0 {
            out.push(Violation::EmptyArray);
        }
        let targets = self.target_count();
        if targets == 0 {
            out.push(Violation::NoTargets);
        }
        let mut seen_clutter = false;
        for (index, obj) in self.objects.iter().enumerate() {
            match obj.kind {
                ObjectKind::Clutter => seen_clutter = true,
                ObjectKind::Target if seen_clutter => out.push(Violation::ObjectOrder { index }),
                ObjectKind::Target => {}
            }
            if !(obj.response_power > 0.0) || !obj.response_power.is_finite() {
                out.push(Violation::NonPositiveResponse {
                    index,
                    value: obj.response_power,
                });
            }
            if !obj.azimuth_deg.is_finite() || !obj.elevation_deg.is_finite() {
                out.push(Violation::NonFiniteAngle { index });
            }
        }
        if self.sensors.sensor_count == 0 {
            out.push(Violation::NoSensors);
        }
        if !(self.sensors.alpha_max > 0.0) {
            out.push(Violation::NonPositiveAlphaMax(self.sensors.alpha_max));
        }
        if !(self.sensors.sensor_noise_var > 0.0) {
            out.push(Violation::NonPositiveSensorNoise(
                self.sensors.sensor_noise_var,
            ));
        }
        if self.fusion.antenna_count == 0 {
            out.push(Violation::NoFusionAntennas);
        }
        if !(self.fusion.fc_noise_var > 0.0) {
            out.push(Violation::NonPositiveFusionNoise(self.fusion.fc_noise_var));
        }
        if !(self.p_max > 0.0) {
            out.push(Violation::NonPositivePowerCap(self.p_max));
        }
        if self.sinr_demands.len() != targets {
            out.push(Violation::DemandCount {
                demands: self.sinr_demands.len(),
                targets,
            });
        }
        for (index, &value) in self.sinr_demands.iter().enumerate() {
            if !(value > 0.0) {
                out.push(Violation::NonPositiveDemand { index, value });
            }
        }
        let dimensions = self.sensors.sensor_count * self.fusion.antenna_count;
        if dimensions < self.object_count() {
            out.push(Violation::ZfDimension {
                dimensions,
                objects: self.object_count(),
            });
        }
        out
    }
}

/// Checks every scene invariant. `Ok` may still carry warnings, so callers that
/// care about ZF applicability should inspect [`Scene::violations`] directly.
pub fn validate_scene(scene: &Scene) -> Result<(), Vec<Violation>> {
    let violations = scene.violations();
    if violations.iter().all(Violation::is_warning) {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Object-to-sensor gains and sensor-to-fusion-center vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `(N + N') x K`, entry `(i, k)` is the gain from object `i` to sensor `k`.
    pub g: DMatrix<Complex64>,
    /// One length-`R` vector per sensor.
    pub f: Vec<DVector<Complex64>>,
    target_count: usize,
}

impl ChannelSet {
    /// # Panics
    ///
    /// If `f` does not hold one vector per column of `g`, the vectors differ
    /// in length, or `target_count` exceeds the number of objects.
    pub fn new(g: DMatrix<Complex64>, f: Vec<DVector<Complex64>>, target_count: usize) -> Self {
        assert_eq!(g.ncols(), f.len(), "one fusion channel per sensor");
        assert!(target_count <= g.nrows());
        if let Some(first) = f.first() {
            assert!(f.iter().all(|fk| fk.len() == first.len()));
        }
        Self { g, f, target_count }
    }

    pub fn target_count(&self) -> usize {
        self.target_count
    }

    pub fn object_count(&self) -> usize {
        self.g.nrows()
    }

    pub fn sensor_count(&self) -> usize {
        self.g.ncols()
    }

    pub fn antenna_count(&self) -> usize {
        self.f.first().map_or(0, |fk| fk.len())
    }

    /// `||f_k||^2` for every sensor.
    pub fn fusion_gains(&self) -> Vec<f64> {
        self.f.iter().map(|fk| fk.norm_squared()).collect()
    }
}

/// Draws every channel coefficient i.i.d. CN(0, 1) from a seeded ChaCha stream.
/// The gains `g` are drawn row by row first, then the `f_k` in sensor order.
pub fn generate_channels(scene: &Scene, seed: u64) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = scene.object_count();
    let sensors = scene.sensors.sensor_count;
    let antennas = scene.fusion.antenna_count;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    };
    let mut g = DMatrix::zeros(objects, sensors);
    for i in 0..objects {
        for k in 0..sensors {
            g[(i, k)] = draw();
        }
    }
    let f = (0..sensors)
        .map(|_| DVector::from_fn(antennas, |_, _| draw()))
        .collect();
    ChannelSet::new(g, f, scene.target_count())
}
