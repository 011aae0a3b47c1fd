//! Analytic expressions for every detection and coincidence statistic.
//!
//! These are evaluated directly from `ε`, `χ`, `φ` and never touch the
//! amplitude-propagation path, so they serve as an independent oracle for
//! [`crate::optics`] and [`crate::density`].
//!
//! Ratios are returned as [`Ratio`], which is `Unbounded` when the
//! denominator probability vanishes (e.g. `P_s/P_s'` at `V_ε sin φ = −1`).
//! Note that `P_s/P_s'` is *maximal* at `sin φ = −1`, not at `sin φ = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::check_unit_interval;
use crate::state::Amplitude;

/// Denominator probabilities at or below this are treated as zero.
pub const POLE_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeParams {
    /// `BS_s` amplitude transmissivity.
    pub epsilon: f64,
    /// `BS_i` amplitude transmissivity.
    pub chi: f64,
    /// Signal-arm phase, radians.
    pub phi: f64,
}

impl FringeParams {
    pub fn new(epsilon: f64, chi: f64, phi: f64) -> Result<Self> {
        let p = FringeParams { epsilon, chi, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("epsilon", self.epsilon)?;
        check_unit_interval("chi", self.chi)?;
        if !self.phi.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "phi",
                value: self.phi,
                range: "finite reals",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Zero denominator; the numerator is kept for reporting.
    Unbounded { numerator: f64 },
}

impl Ratio {
    pub fn from_probs(numerator: f64, denominator: f64) -> Self {
        if denominator.abs() <= POLE_TOLERANCE {
            Ratio::Unbounded { numerator }
        } else {
            Ratio::Finite(numerator / denominator)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(*v),
            Ratio::Unbounded { .. } => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Ratio::Unbounded { .. })
    }

    /// Relative deviation `|a − b| / max(1, |b|)`; zero when both are
    /// unbounded, infinite when only one is.
    pub fn deviation(&self, reference: &Ratio) -> f64 {
        match (self, reference) {
            (Ratio::Finite(a), Ratio::Finite(b)) => (a - b).abs() / b.abs().max(1.0),
            (Ratio::Unbounded { .. }, Ratio::Unbounded { .. }) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v:?}"),
            Ratio::Unbounded { .. } => f.write_str("inf"),
        }
    }
}

/// Joint detection probabilities `P_{s,i}, P_{s',i}, P_{s,i'}, P_{s',i'}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceProbs {
    pub s_i: f64,
    pub sp_i: f64,
    pub s_ip: f64,
    pub sp_ip: f64,
}

impl CoincidenceProbs {
    pub fn sum(&self) -> f64 {
        self.s_i + self.sp_i + self.s_ip + self.sp_ip
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s_i, self.sp_i, self.s_ip, self.sp_ip]
    }
}

/// Amplitudes on `s⊗i, s'⊗i, s⊗i', s'⊗i'` after both splitters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EraserAmplitudes {
    pub s_i: Amplitude,
    pub sp_i: Amplitude,
    pub s_ip: Amplitude,
    pub sp_ip: Amplitude,
}

fn complement(tau: f64) -> f64 {
    (1.0 - tau * tau).max(0.0).sqrt()
}

/// Fringe visibility `V_ε = 2ε√(1−ε²)`.
pub fn visibility(epsilon: f64) -> Result<f64> {
    check_unit_interval("epsilon", epsilon)?;
    Ok(2.0 * epsilon * complement(epsilon))
}

/// Output amplitudes `(a_s, a_s')` of the single-photon superposition after
/// the phase and `BS_s`.
pub fn single_amplitudes(epsilon: f64, phi: f64) -> Result<(Amplitude, Amplitude)> {
    check_unit_interval("epsilon", epsilon)?;
    let r = complement(epsilon);
    let e = Amplitude::from_polar(1.0, phi);
    let i = Amplitude::i();
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    Ok(((epsilon + i * e * r) * norm, (i * r + epsilon * e) * norm))
}

/// `(P_s, P_s') = ((1 − V_ε sin φ)/2, (1 + V_ε sin φ)/2)`.
pub fn single_probs(epsilon: f64, phi: f64) -> Result<(f64, f64)> {
    let v = visibility(epsilon)? * phi.sin();
    Ok(((1.0 - v) / 2.0, (1.0 + v) / 2.0))
}

/// `P_s / P_s' = (1 − V_ε sin φ)/(1 + V_ε sin φ)`.
pub fn single_ratio(epsilon: f64, phi: f64) -> Result<Ratio> {
    let (p, q) = single_probs(epsilon, phi)?;
    Ok(Ratio::from_probs(p, q))
}

/// Maximum of `P_s/P_s'` over `φ`, `(1 + V_ε)/(1 − V_ε)`, attained at
/// `sin φ = −1`.
pub fn single_ratio_extremum(epsilon: f64) -> Result<Ratio> {
    let v = visibility(epsilon)?;
    Ok(Ratio::from_probs((1.0 + v) / 2.0, (1.0 - v) / 2.0))
}

/// Signal singles for the maximally entangled pair: flat `(1/2, 1/2)`
/// whatever `ε` and `φ`.
pub fn entangled_single_probs() -> (f64, f64) {
    (0.5, 0.5)
}

/// `(P_{s,i1}, P_{s',i1}) = ((1−ε²)/2, ε²/2)`, independent of `φ`.
pub fn marker_coincidence_probs(epsilon: f64) -> Result<(f64, f64)> {
    check_unit_interval("epsilon", epsilon)?;
    let e2 = epsilon * epsilon;
    Ok(((1.0 - e2) / 2.0, e2 / 2.0))
}

/// `P_{s,i1}/P_{s',i1} = (1−ε²)/ε²`; unbounded at `ε = 0`.
pub fn marker_coincidence_ratio(epsilon: f64) -> Result<Ratio> {
    let (p, q) = marker_coincidence_probs(epsilon)?;
    Ok(Ratio::from_probs(p, q))
}

/// Joint amplitudes behind both splitters, with `√(1−χ²)` in every
/// reflection term.
pub fn eraser_amplitudes(params: &FringeParams) -> Result<EraserAmplitudes> {
    params.validate()?;
    let (eps, chi) = (params.epsilon, params.chi);
    let (r_eps, r_chi) = (complement(eps), complement(chi));
    let e = Amplitude::from_polar(1.0, params.phi);
    let i = Amplitude::i();
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    Ok(EraserAmplitudes {
        s_i: (-e * r_eps * r_chi + eps * chi) * norm,
        sp_i: i * (e * eps * r_chi + r_eps * chi) * norm,
        s_ip: i * (e * r_eps * chi + eps * r_chi) * norm,
        sp_ip: (e * eps * chi - r_eps * r_chi) * norm,
    })
}

/// `P_{s,i}` and `P_{s',i}` from the fringe formulas; the `i'` pair from
/// the squared joint amplitudes.
pub fn eraser_coincidence_probs(params: &FringeParams) -> Result<CoincidenceProbs> {
    let amps = eraser_amplitudes(params)?;
    let (e2, c2) = (params.epsilon.powi(2), params.chi.powi(2));
    let fringe = params.chi * complement(params.chi) * visibility(params.epsilon)? * params.phi.cos();
    Ok(CoincidenceProbs {
        s_i: (1.0 - e2 - c2 + 2.0 * e2 * c2 - fringe) / 2.0,
        sp_i: (e2 + c2 - 2.0 * e2 * c2 + fringe) / 2.0,
        s_ip: amps.s_ip.norm_sqr(),
        sp_ip: amps.sp_ip.norm_sqr(),
    })
}

/// `P_{s,i}/P_{s',i}`.
pub fn eraser_coincidence_ratio(params: &FringeParams) -> Result<Ratio> {
    let p = eraser_coincidence_probs(params)?;
    Ok(Ratio::from_probs(p.s_i, p.sp_i))
}
