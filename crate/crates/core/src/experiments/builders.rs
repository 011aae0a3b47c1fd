use std::f64::consts::FRAC_1_SQRT_2;

use crate::closed_form::CoincidenceProbs;
use crate::error::{Error, Result};
use crate::optics::{evaluate_network, BeamSplitter, OpticalNetwork};
use crate::state::{Amplitude, ModeLabel, PureState, StateKind, I, I1, I2, I_PRIME, S, S1, S2, S_PRIME};

fn half() -> Amplitude {
    Amplitude::new(FRAC_1_SQRT_2, 0.0)
}

/// `(|1_{s1}⟩ + |1_{s2}⟩)/√2`.
pub fn single_source() -> PureState {
    PureState::make_superposition(half(), S1, half(), S2).expect("balanced superposition")
}

/// `(|1_{s1}⟩|1_{i1}⟩ + |1_{s2}⟩|1_{i2}⟩)/√2`.
pub fn entangled_source() -> PureState {
    PureState::make_entangled_pair([(half(), S1, I1), (half(), S2, I2)]).expect("maximally entangled pair")
}

/// `(|1_{s1}⟩ + |1_{s2}⟩)/√2 ⊗ |1_i⟩`.
pub fn separable_source() -> PureState {
    single_source().tensor_with_idler(I).expect("idler label is free")
}

fn signal_arm(epsilon: f64, phi: f64) -> Result<OpticalNetwork> {
    Ok(OpticalNetwork::new()
        .phase(S1, phi)
        .beam_splitter(BeamSplitter::signal(epsilon)?))
}

/// Single photon through the phase and `BS_s(ε)`.
pub fn build_single(epsilon: f64, phi: f64) -> Result<PureState> {
    evaluate_network(&single_source(), &signal_arm(epsilon, phi)?)
}

/// Entangled pair after `BS_s(ε)` only: the idler modes `i1`/`i2` still
/// mark which crystal fired.
pub fn build_owzm_which_path(epsilon: f64, phi: f64) -> Result<PureState> {
    evaluate_network(&entangled_source(), &signal_arm(epsilon, phi)?)
}

/// Entangled pair through the phase, Alice's `BS_s(ε)` and Bob's `BS_i(χ)`.
pub fn build_owzm(epsilon: f64, chi: f64, phi: f64) -> Result<PureState> {
    let net = signal_arm(epsilon, phi)?.beam_splitter(BeamSplitter::idler(chi)?);
    evaluate_network(&entangled_source(), &net)
}

/// Separable source through the phase and `BS_s(ε)`; stays a product with
/// `|1_i⟩`.
pub fn build_zwm(epsilon: f64, phi: f64) -> Result<PureState> {
    evaluate_network(&separable_source(), &signal_arm(epsilon, phi)?)
}

/// Joint probabilities over `{s, s'} × {idler A, idler B}`, where the idler
/// pair is `(i, i')` behind Bob's splitter or `(i1, i2)` before it.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    idler_modes: [ModeLabel; 2],
    /// `probs[signal][idler]`, signal 0 = `s`, 1 = `s'`.
    probs: [[f64; 2]; 2],
}

impl OutcomeDistribution {
    pub fn idler_modes(&self) -> &[ModeLabel; 2] {
        &self.idler_modes
    }

    pub fn get(&self, signal: usize, idler: usize) -> f64 {
        self.probs[signal][idler]
    }

    pub fn coincidences(&self) -> CoincidenceProbs {
        CoincidenceProbs {
            s_i: self.probs[0][0],
            sp_i: self.probs[1][0],
            s_ip: self.probs[0][1],
            sp_ip: self.probs[1][1],
        }
    }

    /// `(P_s, P_s')`.
    pub fn signal_marginals(&self) -> (f64, f64) {
        (self.probs[0][0] + self.probs[0][1], self.probs[1][0] + self.probs[1][1])
    }

    /// Bob's marginals on the two idler detectors.
    pub fn idler_marginals(&self) -> (f64, f64) {
        (self.probs[0][0] + self.probs[1][0], self.probs[0][1] + self.probs[1][1])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }
}

pub fn outcome_distribution(state: &PureState) -> Result<OutcomeDistribution> {
    if state.kind() != StateKind::TwoPhoton {
        return Err(Error::NotTwoPhoton);
    }
    let signal_slot = |m: &ModeLabel| match m.as_str() {
        S => Some(0),
        S_PRIME => Some(1),
        _ => None,
    };
    let erased = [ModeLabel::from(I), ModeLabel::from(I_PRIME)];
    let marked = [ModeLabel::from(I1), ModeLabel::from(I2)];
    let idlers = state.idler_modes();
    let idler_modes = if idlers.iter().all(|m| erased.contains(m)) {
        erased
    } else if idlers.iter().all(|m| marked.contains(m)) {
        marked
    } else {
        return Err(Error::Basis(format!(
            "idler modes {idlers:?} are neither within {{i, i'}} nor {{i1, i2}}"
        )));
    };
    let mut probs = [[0.0; 2]; 2];
    for (label, amp) in state.entries() {
        let s = signal_slot(label.signal())
            .ok_or_else(|| Error::Basis(format!("signal mode {} is not a detector mode", label.signal())))?;
        let idler = label.idler().expect("two-photon label");
        let i = idler_modes.iter().position(|m| m == idler).expect("checked above");
        probs[s][i] += amp.norm_sqr();
    }
    Ok(OutcomeDistribution { idler_modes, probs })
}
