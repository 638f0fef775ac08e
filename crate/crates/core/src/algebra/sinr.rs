//! Symbolic MRC SINR terms in the variables `p_j` and `alpha_k`, and the
//! sign condition under which the interference term stays a posynomial.

use std::fmt;

use super::{split_signomial, Assignment, Monomial, Posynomial, Signomial, VarId};
use crate::beamforming::IncidentPowerMap;
use crate::scene::{ChannelSet, Scene};

/// Indices `(j, i, k, l)` of a negative interference cross term: target `j`,
/// interferer `i`, sensor pair `k < l`. Zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadruple {
    pub target: usize,
    pub interferer: usize,
    pub sensor_k: usize,
    pub sensor_l: usize,
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(j={}, i={}, k={}, l={})",
            self.target + 1,
            self.interferer + 1,
            self.sensor_k + 1,
            self.sensor_l + 1
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub posynomial: bool,
    pub violations: Vec<Quadruple>,
}

/// `Re{g_jk g*_ik g*_jl g_il}`, the sign of the `alpha_k alpha_l` cross term
/// of interferer `i` in target `j`'s MRC interference.
fn cross_term_sign_factor(channels: &ChannelSet, j: usize, i: usize, k: usize, l: usize) -> f64 {
    let g = &channels.g;
    (g[(j, k)] * g[(i, k)].conj() * g[(j, l)].conj() * g[(i, l)]).re
}

/// Checks whether every target's MRC interference is a posynomial in
/// `alpha`, i.e. every cross term `Re{g_jk g*_ik g*_jl g_il}` with `i != j`,
/// `k != l` is nonnegative. The real part is symmetric in `k, l`, so only
/// `k < l` is enumerated.
pub fn lemma1_check(channels: &ChannelSet) -> Lemma1Report {
    let mut violations = Vec::new();
    let sensors = channels.sensor_count();
    for j in 0..channels.target_count() {
        for i in (0..channels.object_count()).filter(|&i| i != j) {
            for k in 0..sensors {
                for l in k + 1..sensors {
                    if cross_term_sign_factor(channels, j, i, k, l) < 0.0 {
                        violations.push(Quadruple {
                            target: j,
                            interferer: i,
                            sensor_k: k,
                            sensor_l: l,
                        });
                    }
                }
            }
        }
    }
    Lemma1Report {
        posynomial: violations.is_empty(),
        violations,
    }
}

/// All SINR terms of one target under MRT/MRC, as expressions.
///
/// The interference is kept both as one merged signomial and as its split
/// `interference_plus - interference_minus`. The split is taken per
/// interferer and then summed, so a negative cross term of one interferer is
/// never hidden by a positive term of another.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcSinrExpressions {
    pub target: usize,
    pub desired: Posynomial,
    pub interference: Signomial,
    pub interference_plus: Posynomial,
    pub interference_minus: Posynomial,
    pub sensor_noise: Posynomial,
    pub fc_noise: Posynomial,
}

impl MrcSinrExpressions {
    /// `psi (I+ + Ns + Nfc)` over `Des + psi I-`; the SINR demand holds iff the
    /// ratio is at most one.
    pub fn ratio_constraint(&self, psi: f64) -> (Posynomial, Posynomial) {
        let numerator = self
            .interference_plus
            .add(&self.sensor_noise)
            .add(&self.fc_noise)
            .scale(psi);
        let denominator = if self.interference_minus.is_empty() {
            self.desired.clone()
        } else {
            self.desired.add(&self.interference_minus.scale(psi))
        };
        (numerator, denominator)
    }

    pub fn sinr(&self, point: &Assignment) -> Result<f64, super::AlgebraError> {
        let desired = self.desired.evaluate(point)?;
        if desired == 0.0 {
            return Ok(0.0);
        }
        let rest = self.interference.evaluate(point)?
            + self.sensor_noise.evaluate(point)?
            + self.fc_noise.evaluate(point)?;
        Ok(desired / rest)
    }
}

fn positive(terms: impl IntoIterator<Item = Monomial>) -> Posynomial {
    Posynomial::from_terms(terms).expect("coefficients are nonnegative by construction")
}

/// Incident power at object `i` as a posynomial in `p`.
fn incident_power(map: &IncidentPowerMap, i: usize) -> Posynomial {
    positive(
        (0..map.beam_count())
            .map(|l| Monomial::constant(map.coefficient(i, l)).with(VarId::power(l), 1.0)),
    )
}

fn build(
    target: usize,
    scene: &Scene,
    channels: &ChannelSet,
    map: &IncidentPowerMap,
    fixed: Option<&Assignment>,
) -> MrcSinrExpressions {
    let j = target;
    let g = &channels.g;
    let fgain = channels.fusion_gains();
    let sensors = channels.sensor_count();
    let q = scene.response_powers();
    let alpha = VarId::amplification;
    let fold = |p: Posynomial| match fixed {
        Some(values) => p.substitute(values),
        None => p,
    };

    let coherent = positive(
        (0..sensors)
            .map(|k| Monomial::constant(g[(j, k)].norm_sqr() * fgain[k]).with(alpha(k), 1.0)),
    );
    let desired = fold(
        incident_power(map, j)
            .mul(&coherent)
            .mul(&coherent)
            .scale(q[j]),
    );

    let mut interference = Signomial::zero();
    let mut plus = Posynomial::zero();
    let mut minus = Posynomial::zero();
    for i in (0..channels.object_count()).filter(|&i| i != j) {
        // |sum_k alpha_k ||f_k||^2 g_jk g*_ik|^2 expanded over sensor pairs.
        let mut gamma = Vec::new();
        for k in 0..sensors {
            let ck = g[(j, k)] * g[(i, k)].conj() * fgain[k];
            for l in k..sensors {
                let coefficient = if k == l {
                    ck.norm_sqr()
                } else {
                    let cl = g[(j, l)] * g[(i, l)].conj() * fgain[l];
                    2.0 * (ck * cl.conj()).re
                };
                gamma.push(
                    Monomial::constant(coefficient)
                        .with(alpha(k), 1.0)
                        .with(alpha(l), 1.0),
                );
            }
        }
        let gamma = Signomial::from_terms(gamma);
        let mut per_interferer = incident_power(map, i)
            .as_signomial()
            .mul(&gamma)
            .scale(q[i]);
        if let Some(values) = fixed {
            per_interferer = per_interferer.substitute(values);
        }
        let (pi, mi) = split_signomial(&per_interferer);
        interference = interference.add(&per_interferer);
        plus = plus.add(&pi);
        minus = minus.add(&mi);
    }

    let sigma_n = scene.sensors.sensor_noise_var;
    let sigma_fc = scene.fusion.fc_noise_var;
    let sensor_noise = fold(positive((0..sensors).map(|k| {
        Monomial::constant(sigma_n * g[(j, k)].norm_sqr() * fgain[k] * fgain[k]).with(alpha(k), 2.0)
    })));
    let fc_noise = fold(coherent.scale(sigma_fc));

    MrcSinrExpressions {
        target,
        desired,
        interference,
        interference_plus: plus,
        interference_minus: minus,
        sensor_noise,
        fc_noise,
    }
}

/// MRC SINR terms of `target` as expressions in `p` and `alpha`.
pub fn build_mrc_sinr_signomial(
    target: usize,
    scene: &Scene,
    channels: &ChannelSet,
    map: &IncidentPowerMap,
) -> MrcSinrExpressions {
    build(target, scene, channels, map, None)
}

/// Same as [`build_mrc_sinr_signomial`] with the amplifications folded in
/// as constants, leaving expressions in `p` only. With `alpha` fixed every
/// interferer's factor `|sum_k ...|^2` is a nonnegative number, so the
/// interference is always a posynomial.
pub fn build_mrc_sinr_fixed_amplification(
    target: usize,
    scene: &Scene,
    channels: &ChannelSet,
    map: &IncidentPowerMap,
    alphas: &[f64],
) -> MrcSinrExpressions {
    let fixed = Assignment::from_parts(&[], alphas);
    build(target, scene, channels, map, Some(&fixed))
}
