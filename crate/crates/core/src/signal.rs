//! Stacked space-time receive model at the fusion center and SINR evaluation
//! for arbitrary, MRC and ZF combiners.
//!
//! Sensor `k` forwards `sqrt(alpha_k) * y_k` in time slot `k`; the fusion
//! center stacks its `R` antennas over the `K` slots into one `K*R` vector.
//! Object `i` then appears through `w_i`, whose block `k` is
//! `sqrt(alpha_k) g_ik f_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::scene::{ChannelSet, Scene};

/// Gram condition numbers above this are treated as rank deficient.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("zero-forcing is not applicable: {reason}")]
    RankDeficient { reason: String },
    #[error("closed-form MRC SINR needs equal noise variances (sensor {sensor}, fusion {fusion})")]
    NoiseMismatch { sensor: f64, fusion: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannels {
    /// One stacked vector of length `K*R` per object.
    pub w: Vec<DVector<Complex64>>,
    /// Block-diagonal sensor-noise covariance; block `k` is `alpha_k sigma_n^2 f_k f_k^H`.
    pub noise_cov_sensor: DMatrix<Complex64>,
    pub sensor_count: usize,
    pub antenna_count: usize,
    pub target_count: usize,
}

impl EquivalentChannels {
    pub fn dimension(&self) -> usize {
        self.sensor_count * self.antenna_count
    }

    /// `W = [w_1 ... w_{N+N'}]`.
    pub fn stacked(&self) -> DMatrix<Complex64> {
        DMatrix::from_columns(&self.w)
    }
}

pub fn equivalent_channels(
    channels: &ChannelSet,
    alphas: &[f64],
    sensor_noise_var: f64,
) -> EquivalentChannels {
    let k_count = channels.sensor_count();
    let r = channels.antenna_count();
    assert_eq!(alphas.len(), k_count, "one amplification factor per sensor");
    let dim = k_count * r;
    let w = (0..channels.object_count())
        .map(|i| {
            let mut wi = DVector::zeros(dim);
            for (k, fk) in channels.f.iter().enumerate() {
                let scale = channels.g[(i, k)] * alphas[k].sqrt();
                wi.rows_mut(k * r, r).copy_from(&(fk * scale));
            }
            wi
        })
        .collect();
    let mut noise = DMatrix::zeros(dim, dim);
    for (k, fk) in channels.f.iter().enumerate() {
        let block = fk * fk.adjoint() * Complex64::from(alphas[k] * sensor_noise_var);
        noise.view_mut((k * r, k * r), (r, r)).copy_from(&block);
    }
    EquivalentChannels {
        w,
        noise_cov_sensor: noise,
        sensor_count: k_count,
        antenna_count: r,
        target_count: channels.target_count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerScheme {
    Mrc,
    Zf,
    Custom,
}

/// Post-processing matrix, one column per target.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    pub columns: Vec<DVector<Complex64>>,
    pub scheme: CombinerScheme,
}

/// Matched filter: column `j` is `w_j`.
pub fn mrc_combiner(eq: &EquivalentChannels) -> Combiner {
    Combiner {
        columns: eq.w[..eq.target_count].to_vec(),
        scheme: CombinerScheme::Mrc,
    }
}

/// Target columns of `W (W^H W)^{-1}`.
///
/// Computed from the thin SVD `W = U S V^H` as `U S^{-1} V^H`, which avoids
/// forming the Gram matrix explicitly.
pub fn zf_combiner(eq: &EquivalentChannels) -> Result<Combiner, SignalError> {
    let objects = eq.w.len();
    let dim = eq.dimension();
    if dim < objects {
        return Err(SignalError::RankDeficient {
            reason: format!("K*R = {dim} < {objects} objects"),
        });
    }
    // W = blockdiag(f_1..f_K) diag(sqrt(alpha)) G^T has rank at most K
    if eq.sensor_count < objects {
        return Err(SignalError::RankDeficient {
            reason: format!(
                "rank of W is at most K = {} < {objects} objects",
                eq.sensor_count
            ),
        });
    }
    let svd = eq.stacked().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    if !(s_min > 0.0) {
        return Err(SignalError::RankDeficient {
            reason: "equivalent channels are linearly dependent".into(),
        });
    }
    let condition = (s_max / s_min).powi(2);
    if condition > ZF_CONDITION_LIMIT {
        return Err(SignalError::RankDeficient {
            reason: format!("Gram condition number {condition:.3e} exceeds {ZF_CONDITION_LIMIT:e}"),
        });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let mut scaled = u;
    for (c, sv) in s.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / sv);
    }
    let v = scaled * v_t;
    Ok(Combiner {
        columns: (0..eq.target_count)
            .map(|j| v.column(j).into_owned())
            .collect(),
        scheme: CombinerScheme::Zf,
    })
}

/// The four variance terms of one target's SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrTerms {
    pub desired: f64,
    pub interference: f64,
    pub sensor_noise: f64,
    pub fc_noise: f64,
}

impl SinrTerms {
    /// Ratio of desired power to interference plus noise. A zero desired
    /// term yields 0 even when the denominator also vanishes.
    pub fn ratio(&self) -> f64 {
        if self.desired == 0.0 {
            return 0.0;
        }
        self.desired / (self.interference + self.sensor_noise + self.fc_noise)
    }
}

pub fn sinr_terms(
    target: usize,
    combiner: &Combiner,
    eq: &EquivalentChannels,
    deltas: &[f64],
    response_powers: &[f64],
    fc_noise_var: f64,
) -> SinrTerms {
    let v = &combiner.columns[target];
    assert_eq!(v.len(), eq.dimension(), "combiner dimension mismatch");
    let received = |i: usize| deltas[i] * response_powers[i] * v.dotc(&eq.w[i]).norm_sqr();
    let interference = (0..eq.w.len()).filter(|&i| i != target).map(received).sum();
    let sensor_noise = v.dotc(&(&eq.noise_cov_sensor * v)).re;
    SinrTerms {
        desired: received(target),
        interference,
        sensor_noise,
        fc_noise: fc_noise_var * v.norm_squared(),
    }
}

/// SINR of `target` under the given combiner. A zero combiner column gives 0.
pub fn sinr(
    target: usize,
    combiner: &Combiner,
    eq: &EquivalentChannels,
    deltas: &[f64],
    response_powers: &[f64],
    fc_noise_var: f64,
) -> f64 {
    sinr_terms(target, combiner, eq, deltas, response_powers, fc_noise_var).ratio()
}

/// Closed-form MRC SINR terms for target `j`, assuming `sigma_n^2 = sigma_fc^2`.
pub fn mrc_sinr_terms_closed_form(
    target: usize,
    alphas: &[f64],
    scene: &Scene,
    channels: &ChannelSet,
    deltas: &[f64],
) -> Result<SinrTerms, SignalError> {
    let sigma_n = scene.sensors.sensor_noise_var;
    let sigma_fc = scene.fusion.fc_noise_var;
    if (sigma_n - sigma_fc).abs() > 1e-12 * sigma_n.abs().max(sigma_fc.abs()) {
        return Err(SignalError::NoiseMismatch {
            sensor: sigma_n,
            fusion: sigma_fc,
        });
    }
    let sigma = sigma_n;
    let fgain = channels.fusion_gains();
    let g = &channels.g;
    let q = scene.response_powers();
    let j = target;

    let coherent: f64 = (0..alphas.len())
        .map(|k| alphas[k] * g[(j, k)].norm_sqr() * fgain[k])
        .sum();
    let interference = (0..channels.object_count())
        .filter(|&i| i != j)
        .map(|i| {
            let cross: Complex64 = (0..alphas.len())
                .map(|k| g[(j, k)] * g[(i, k)].conj() * (alphas[k] * fgain[k]))
                .sum();
            deltas[i] * q[i] * cross.norm_sqr()
        })
        .sum();
    let sensor_noise = (0..alphas.len())
        .map(|k| sigma * alphas[k].powi(2) * g[(j, k)].norm_sqr() * fgain[k].powi(2))
        .sum();
    Ok(SinrTerms {
        desired: deltas[j] * q[j] * coherent * coherent,
        interference,
        sensor_noise,
        fc_noise: sigma * coherent,
    })
}

/// Closed-form MRC SINR with MRT transmit powers `powers` and sensor gains `alphas`.
pub fn mrc_sinr_closed_form(
    target: usize,
    powers: &[f64],
    alphas: &[f64],
    scene: &Scene,
    channels: &ChannelSet,
) -> Result<f64, SignalError> {
    let deltas = crate::beamforming::IncidentPowerMap::for_scene(scene).apply(powers);
    mrc_sinr_terms_closed_form(target, alphas, scene, channels, &deltas).map(|t| t.ratio())
}

/// `log2(1 + rho)` in bits.
pub fn mutual_information(rho: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    (1.0 + rho).log2()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::beamforming::IncidentPowerMap;
    use crate::scene::{fixtures::two_target_scene, generate_channels};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_channels() -> ChannelSet {
        ChannelSet::new(
            DMatrix::from_element(1, 1, c(1.0)),
            vec![DVector::from_element(1, c(1.0))],
            1,
        )
    }

    fn random_complex(rng: &mut impl Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    #[test]
    fn scalar_plug_in() {
        let eq = equivalent_channels(&scalar_channels(), &[1.0], 0.5);
        assert_eq!(eq.w[0].as_slice(), &[c(1.0)]);
        assert_eq!(eq.noise_cov_sensor[(0, 0)], c(0.5));
    }

    #[test]
    fn scalar_sinr_is_one() {
        let eq = equivalent_channels(&scalar_channels(), &[1.0], 0.5);
        let comb = mrc_combiner(&eq);
        assert_eq!(comb.columns[0], eq.w[0]);
        let rho = sinr(0, &comb, &eq, &[1.0], &[1.0], 0.5);
        assert!((rho - 1.0).abs() < 1e-15);
        assert_eq!(mutual_information(rho), 1.0);
    }

    #[test]
    fn alpha_scaling_acts_per_block() {
        let scene = two_target_scene(3);
        let ch = generate_channels(&scene, 11);
        let base = equivalent_channels(&ch, &[1.0, 1.0, 1.0], 0.5);
        let bumped = equivalent_channels(&ch, &[4.0, 1.0, 1.0], 0.5);
        let r = ch.antenna_count();
        for i in 0..3 {
            for idx in 0..3 * r {
                let factor = if idx < r { 2.0 } else { 1.0 };
                assert!((bumped.w[i][idx] - base.w[i][idx] * factor).norm() < 1e-12);
            }
        }
        for a in 0..3 * r {
            for b in 0..3 * r {
                let factor = if a < r && b < r { 4.0 } else { 1.0 };
                let want = base.noise_cov_sensor[(a, b)] * factor;
                assert!((bumped.noise_cov_sensor[(a, b)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn stacking_matches_per_entry_definition() {
        let scene = two_target_scene(4);
        let ch = generate_channels(&scene, 5);
        let alphas = [0.3, 1.7, 2.0, 0.9];
        let eq = equivalent_channels(&ch, &alphas, 0.5);
        let r = ch.antenna_count();
        for i in 0..3 {
            for k in 0..4 {
                for a in 0..r {
                    let want = ch.g[(i, k)] * ch.f[k][a] * alphas[k].sqrt();
                    assert!((eq.w[i][k * r + a] - want).norm() < 1e-12);
                }
            }
        }
        // off-diagonal blocks vanish, Hermitian, PSD
        let an = &eq.noise_cov_sensor;
        assert!((an - an.adjoint()).norm() < 1e-12);
        assert_eq!(an[(0, r)], c(0.0));
        let min_eig = an.clone().symmetric_eigenvalues().min();
        assert!(min_eig >= -1e-10, "{min_eig}");
    }

    #[test]
    fn mrc_maximizes_white_noise_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scene = two_target_scene(2);
        let ch = generate_channels(&scene, 2);
        let eq = equivalent_channels(&ch, &[1.0, 2.0], 0.5);
        let wj = &eq.w[0];
        let snr = |v: &DVector<Complex64>| v.dotc(wj).norm_sqr() / v.norm_squared();
        let best = snr(wj);
        for _ in 0..1000 {
            let v = DVector::from_fn(wj.len(), |_, _| random_complex(&mut rng)).normalize();
            assert!(snr(&v) <= best * (1.0 + 1e-12));
            let perturbed = wj + &v * Complex64::from(0.01);
            assert!(snr(&perturbed) <= best * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zf_orthonormal_columns_reproduce_w() {
        let w = vec![
            DVector::from_vec(vec![c(1.0), c(0.0), c(0.0)]),
            DVector::from_vec(vec![c(0.0), Complex64::new(0.0, 1.0), c(0.0)]),
        ];
        let eq = EquivalentChannels {
            w: w.clone(),
            noise_cov_sensor: DMatrix::zeros(3, 3),
            sensor_count: 3,
            antenna_count: 1,
            target_count: 2,
        };
        let zf = zf_combiner(&eq).unwrap();
        for j in 0..2 {
            assert!((&zf.columns[j] - &w[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn zf_nulls_interference() {
        let scene = two_target_scene(3);
        for seed in 0..20 {
            let ch = generate_channels(&scene, seed);
            let eq = equivalent_channels(&ch, &[2.0, 2.0, 2.0], 0.5);
            let zf = zf_combiner(&eq).unwrap();
            for (j, v) in zf.columns.iter().enumerate() {
                for (i, w) in eq.w.iter().enumerate() {
                    let ip = v.dotc(w);
                    if i == j {
                        assert!((ip - c(1.0)).norm() < 1e-9);
                    } else {
                        assert!(ip.norm() <= 1e-9 * v.norm() * w.norm());
                    }
                }
            }
            let deltas = [3.0, 2.0, 1.0];
            let t = sinr_terms(0, &zf, &eq, &deltas, &[1.0; 3], 0.5);
            assert!(t.interference < 1e-18);
        }
    }

    #[test]
    fn zf_rejects_too_few_dimensions() {
        let mut scene = two_target_scene(1);
        scene.fusion.antenna_count = 2;
        let ch = generate_channels(&scene, 0);
        let eq = equivalent_channels(&ch, &[1.0], 0.5);
        assert!(matches!(
            zf_combiner(&eq),
            Err(SignalError::RankDeficient { .. })
        ));
    }

    #[test]
    fn zf_rejects_dependent_channels() {
        let v = DVector::from_vec(vec![c(1.0), c(2.0), c(0.5)]);
        let eq = EquivalentChannels {
            w: vec![v.clone(), &v * c(3.0)],
            noise_cov_sensor: DMatrix::zeros(3, 3),
            sensor_count: 3,
            antenna_count: 1,
            target_count: 1,
        };
        assert!(matches!(
            zf_combiner(&eq),
            Err(SignalError::RankDeficient { .. })
        ));
    }

    #[test]
    fn zero_power_and_zero_combiner_give_zero() {
        let scene = two_target_scene(2);
        let ch = generate_channels(&scene, 9);
        let eq = equivalent_channels(&ch, &[1.0, 1.0], 0.5);
        let comb = mrc_combiner(&eq);
        assert_eq!(sinr(0, &comb, &eq, &[0.0; 3], &[1.0; 3], 0.5), 0.0);
        let zero = Combiner {
            columns: vec![DVector::zeros(eq.dimension()); 2],
            scheme: CombinerScheme::Custom,
        };
        assert_eq!(sinr(1, &zero, &eq, &[1.0; 3], &[1.0; 3], 0.5), 0.0);
    }

    #[test]
    fn sinr_is_projective() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scene = two_target_scene(3);
        let ch = generate_channels(&scene, 4);
        let eq = equivalent_channels(&ch, &[0.5, 1.0, 2.0], 0.5);
        let comb = mrc_combiner(&eq);
        let deltas = [2.0, 1.0, 0.7];
        let base = sinr(1, &comb, &eq, &deltas, &[1.0; 3], 0.5);
        for _ in 0..100 {
            let s = random_complex(&mut rng) * 10.0;
            let mut scaled = comb.clone();
            scaled.columns[1] *= s;
            let rho = sinr(1, &scaled, &eq, &deltas, &[1.0; 3], 0.5);
            assert!((rho - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn closed_form_matches_general_form() {
        let scene = two_target_scene(4);
        let map = IncidentPowerMap::for_scene(&scene);
        for seed in 0..10 {
            let ch = generate_channels(&scene, seed);
            let p = [1.0 + seed as f64, 0.5];
            let alphas = [0.2, 1.1, 2.0, 0.7];
            let eq = equivalent_channels(&ch, &alphas, 0.5);
            let comb = mrc_combiner(&eq);
            let deltas = map.apply(&p);
            for j in 0..2 {
                let general = sinr(j, &comb, &eq, &deltas, &[1.0; 3], 0.5);
                let closed = mrc_sinr_closed_form(j, &p, &alphas, &scene, &ch).unwrap();
                assert!((closed - general).abs() <= 1e-10 * general);
            }
        }
    }

    #[test]
    fn closed_form_requires_equal_noise() {
        let mut scene = two_target_scene(2);
        scene.fusion.fc_noise_var = 0.25;
        let ch = generate_channels(&scene, 0);
        assert!(matches!(
            mrc_sinr_closed_form(0, &[1.0, 1.0], &[1.0, 1.0], &scene, &ch),
            Err(SignalError::NoiseMismatch { .. })
        ));
    }

    #[test]
    fn large_amplification_saturates_at_sensor_noise_limit() {
        // Single target, no interferers: numerator and sensor noise both scale
        // with c^2 while fusion noise scales with c.
        let mut scene = two_target_scene(3);
        scene.objects.truncate(1);
        scene.sinr_demands.truncate(1);
        let ch = generate_channels(&scene, 6);
        let alphas = [0.4, 1.0, 1.5];
        let rho = |c: f64| {
            let a: Vec<f64> = alphas.iter().map(|x| x * c).collect();
            mrc_sinr_closed_form(0, &[1.0], &a, &scene, &ch).unwrap()
        };
        let r1 = rho(1e6);
        let r2 = rho(1e8);
        assert!(r2 > rho(1.0));
        assert!((r2 - r1).abs() <= 1e-4 * r2);
    }

    #[test]
    fn mutual_information_values() {
        assert_eq!(mutual_information(0.0), 0.0);
        assert_eq!(mutual_information(1.0), 1.0);
        assert_eq!(mutual_information(3.0), 2.0);
        assert!(mutual_information(2.0) > mutual_information(1.5));
    }
}
