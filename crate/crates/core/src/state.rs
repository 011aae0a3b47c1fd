//! Labeled-mode state vectors restricted to the one-photon subspace of a
//! single system, or the one-photon-per-subsystem subspace of a signal/idler
//! pair.
//!
//! Basis labels are always kept in canonical (lexicographic) order, so two
//! states built from the same terms in a different order compare equal.
//! Global phase is part of the value: `ψ` and `e^{iθ}ψ` are different states
//! with identical probabilities.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless probability amplitude.
pub type Amplitude = Complex64;

/// Tolerance on `|Σ|a|² − 1|` accepted at construction.
pub const NORM_TOLERANCE: f64 = 1e-12;

pub const S1: &str = "s1";
pub const S2: &str = "s2";
pub const S: &str = "s";
pub const S_PRIME: &str = "s'";
pub const I1: &str = "i1";
pub const I2: &str = "i2";
pub const I: &str = "i";
pub const I_PRIME: &str = "i'";

/// Separator between the signal and idler halves of a two-photon label.
const PAIR_SEPARATOR: char = '|';

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ModeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ModeLabel {
    fn from(name: &str) -> Self {
        ModeLabel::new(name)
    }
}

impl PartialEq<&str> for ModeLabel {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One basis vector: `|1_m⟩` or `|1_s⟩ ⊗ |1_i⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisLabel {
    Single(ModeLabel),
    Pair { signal: ModeLabel, idler: ModeLabel },
}

impl BasisLabel {
    pub fn pair(signal: impl Into<ModeLabel>, idler: impl Into<ModeLabel>) -> Self {
        BasisLabel::Pair {
            signal: signal.into(),
            idler: idler.into(),
        }
    }

    pub fn kind(&self) -> StateKind {
        match self {
            BasisLabel::Single(_) => StateKind::OnePhoton,
            BasisLabel::Pair { .. } => StateKind::TwoPhoton,
        }
    }

    /// The signal-side mode (the only mode for a one-photon label).
    pub fn signal(&self) -> &ModeLabel {
        match self {
            BasisLabel::Single(m) => m,
            BasisLabel::Pair { signal, .. } => signal,
        }
    }

    pub fn idler(&self) -> Option<&ModeLabel> {
        match self {
            BasisLabel::Single(_) => None,
            BasisLabel::Pair { idler, .. } => Some(idler),
        }
    }

    pub fn contains(&self, mode: &ModeLabel) -> bool {
        self.signal() == mode || self.idler() == Some(mode)
    }

    pub(crate) fn parse(text: &str) -> Result<Self> {
        let check = |s: &str| {
            if s.is_empty() || s.contains(PAIR_SEPARATOR) {
                Err(Error::Parse(format!("bad basis label {text:?}")))
            } else {
                Ok(ModeLabel::new(s))
            }
        };
        match text.split_once(PAIR_SEPARATOR) {
            None => Ok(BasisLabel::Single(check(text)?)),
            Some((s, i)) => Ok(BasisLabel::Pair {
                signal: check(s)?,
                idler: check(i)?,
            }),
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Single(m) => write!(f, "{m}"),
            BasisLabel::Pair { signal, idler } => write!(f, "{signal}{PAIR_SEPARATOR}{idler}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    OnePhoton,
    TwoPhoton,
}

/// Phase delay `φ` (radians) in one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseShift {
    pub mode: ModeLabel,
    pub phi: f64,
}

impl PhaseShift {
    pub fn new(mode: impl Into<ModeLabel>, phi: f64) -> Self {
        PhaseShift {
            mode: mode.into(),
            phi,
        }
    }

    /// `φ` reduced into `[0, 2π)`.
    pub fn reduced_phi(&self) -> f64 {
        self.phi.rem_euclid(TAU)
    }

    pub fn factor(&self) -> Amplitude {
        Amplitude::from_polar(1.0, self.phi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct PureState {
    kind: StateKind,
    entries: Vec<(BasisLabel, Amplitude)>,
}

impl PureState {
    /// Validating constructor: labels of one kind, distinct, finite
    /// amplitudes, and unit norm within [`NORM_TOLERANCE`]. Nothing is
    /// renormalized.
    pub fn from_entries(entries: Vec<(BasisLabel, Amplitude)>) -> Result<Self> {
        let state = Self::assemble(entries)?;
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm_sq,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(state)
    }

    /// Structural checks only; used for the output of unitary elements,
    /// where norm is preserved by construction.
    pub(crate) fn assemble(mut entries: Vec<(BasisLabel, Amplitude)>) -> Result<Self> {
        let kind = match entries.first() {
            Some((label, _)) => label.kind(),
            None => return Err(Error::Basis("empty basis".into())),
        };
        if entries.iter().any(|(l, _)| l.kind() != kind) {
            return Err(Error::Basis(
                "one-photon and two-photon labels mixed in one basis".into(),
            ));
        }
        if let Some((label, _)) = entries
            .iter()
            .find(|(_, a)| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::NonFinite(label.to_string()));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Basis(format!("duplicate basis label {}", w[0].0)));
        }
        if kind == StateKind::TwoPhoton {
            let signals: BTreeSet<_> = entries.iter().map(|(l, _)| l.signal()).collect();
            if let Some((l, _)) = entries
                .iter()
                .find(|(l, _)| signals.contains(l.idler().expect("pair label")))
            {
                return Err(Error::Basis(format!(
                    "mode {} used on both the signal and idler side",
                    l.idler().expect("pair label")
                )));
            }
        }
        Ok(PureState { kind, entries })
    }

    /// `|1_m⟩`.
    pub fn basis_state(mode: impl Into<ModeLabel>) -> Self {
        PureState {
            kind: StateKind::OnePhoton,
            entries: vec![(BasisLabel::Single(mode.into()), Amplitude::new(1.0, 0.0))],
        }
    }

    /// `amp1 |1_{mode1}⟩ + amp2 |1_{mode2}⟩`.
    pub fn make_superposition(
        amp1: Amplitude,
        mode1: impl Into<ModeLabel>,
        amp2: Amplitude,
        mode2: impl Into<ModeLabel>,
    ) -> Result<Self> {
        Self::from_entries(vec![
            (BasisLabel::Single(mode1.into()), amp1),
            (BasisLabel::Single(mode2.into()), amp2),
        ])
    }

    /// `Σ_k a_k |1_{s_k}⟩ ⊗ |1_{i_k}⟩`.
    pub fn make_entangled_pair<S, I>(weights: impl IntoIterator<Item = (Amplitude, S, I)>) -> Result<Self>
    where
        S: Into<ModeLabel>,
        I: Into<ModeLabel>,
    {
        Self::from_entries(
            weights
                .into_iter()
                .map(|(a, s, i)| (BasisLabel::pair(s, i), a))
                .collect(),
        )
    }

    /// `|ψ⟩ ⊗ |1_{idler}⟩` for a one-photon `|ψ⟩`.
    pub fn tensor_with_idler(&self, idler_mode: impl Into<ModeLabel>) -> Result<Self> {
        if self.kind != StateKind::OnePhoton {
            return Err(Error::NotOnePhoton);
        }
        let idler = idler_mode.into();
        if self.entries.iter().any(|(l, _)| l.signal() == &idler) {
            return Err(Error::Basis(format!(
                "idler mode {idler} collides with a signal mode"
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|(l, a)| (BasisLabel::pair(l.signal().clone(), idler.clone()), *a))
            .collect();
        Self::assemble(entries)
    }

    /// `⟨self|other⟩`; both states must share the same canonical basis.
    pub fn inner_product(&self, other: &PureState) -> Result<Amplitude> {
        let same = self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((a, _), (b, _))| a == b);
        if !same {
            return Err(Error::BasisMismatch {
                left: self.basis_string(),
                right: other.basis_string(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|((_, a), (_, b))| a.conj() * b)
            .sum())
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(BasisLabel, Amplitude)] {
        &self.entries
    }

    pub fn basis(&self) -> impl Iterator<Item = &BasisLabel> {
        self.entries.iter().map(|(l, _)| l)
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Option<Amplitude> {
        self.entries
            .binary_search_by(|(l, _)| l.cmp(label))
            .ok()
            .map(|k| self.entries[k].1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn contains_mode(&self, mode: &ModeLabel) -> bool {
        self.entries.iter().any(|(l, _)| l.contains(mode))
    }

    /// Distinct signal-side modes (the modes of a one-photon state).
    pub fn signal_modes(&self) -> BTreeSet<&ModeLabel> {
        self.entries.iter().map(|(l, _)| l.signal()).collect()
    }

    pub fn idler_modes(&self) -> BTreeSet<&ModeLabel> {
        self.entries.iter().filter_map(|(l, _)| l.idler()).collect()
    }

    /// `e^{iθ}|ψ⟩`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let f = Amplitude::from_polar(1.0, theta);
        PureState {
            kind: self.kind,
            entries: self.entries.iter().map(|(l, a)| (l.clone(), a * f)).collect(),
        }
    }

    fn basis_string(&self) -> String {
        let labels: Vec<String> = self.entries.iter().map(|(l, _)| l.to_string()).collect();
        format!("[{}]", labels.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    basis: Vec<String>,
    amplitudes: Vec<[f64; 2]>,
}

impl From<PureState> for StateRepr {
    fn from(state: PureState) -> Self {
        let (basis, amplitudes) = state
            .entries
            .into_iter()
            .map(|(l, a)| (l.to_string(), [a.re, a.im]))
            .unzip();
        StateRepr { basis, amplitudes }
    }
}

impl TryFrom<StateRepr> for PureState {
    type Error = Error;

    fn try_from(repr: StateRepr) -> Result<Self> {
        if repr.basis.len() != repr.amplitudes.len() {
            return Err(Error::Parse(format!(
                "{} basis labels but {} amplitudes",
                repr.basis.len(),
                repr.amplitudes.len()
            )));
        }
        let entries = repr
            .basis
            .iter()
            .zip(repr.amplitudes)
            .map(|(l, [re, im])| Ok((BasisLabel::parse(l)?, Amplitude::new(re, im))))
            .collect::<Result<Vec<_>>>()?;
        PureState::from_entries(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    #[test]
    fn balanced_superposition() {
        let psi = PureState::make_superposition(c(FRAC_1_SQRT_2), S1, c(FRAC_1_SQRT_2), S2).unwrap();
        assert_eq!(psi.len(), 2);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-15);
        let s1 = psi.amplitude(&BasisLabel::Single(S1.into())).unwrap();
        assert_eq!(s1, c(FRAC_1_SQRT_2));
    }

    #[test]
    fn three_four_five_superposition() {
        let psi = PureState::make_superposition(c(0.6), S1, c(0.8), S2).unwrap();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-15);
        let basis = PureState::make_superposition(c(1.0), S1, c(0.0), S2).unwrap();
        assert_eq!(basis.norm_sq(), 1.0);
    }

    #[test]
    fn rejects_unnormalized_and_duplicates() {
        let err = PureState::make_superposition(c(0.5), S1, c(0.5), S2).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        let err = PureState::make_superposition(c(0.6), S1, c(0.8), S1).unwrap_err();
        assert!(matches!(err, Error::Basis(_)));
        let err = PureState::make_superposition(c(f64::NAN), S1, c(1.0), S2).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        // just outside tolerance is rejected, not renormalized
        let a = (1.0_f64 - 1e-11).sqrt();
        assert!(PureState::make_superposition(c(a), S1, c(0.0), S2).is_err());
    }

    #[test]
    fn entangled_pairs() {
        let h = FRAC_1_SQRT_2;
        let psi = PureState::make_entangled_pair([(c(h), S1, I1), (c(h), S2, I2)]).unwrap();
        assert_eq!(psi.kind(), StateKind::TwoPhoton);
        assert_eq!(psi.idler_modes().len(), 2);
        let singlet = PureState::make_entangled_pair([(c(h), S1, I1), (c(-h), S2, I2)]).unwrap();
        assert!((singlet.norm_sq() - 1.0).abs() < 1e-15);
        let product = PureState::make_entangled_pair([(c(1.0), S1, I1)]).unwrap();
        assert_eq!(product.len(), 1);
        assert!(PureState::make_entangled_pair([(c(h), S1, I1), (c(h), S1, I1)]).is_err());
        assert!(PureState::make_entangled_pair([(c(h), S1, S2), (c(h), S2, I2)]).is_err());
    }

    #[test]
    fn tensor_with_idler_pairs_every_signal_term() {
        let psi = PureState::make_superposition(c(0.6), S1, c(0.8), S2).unwrap();
        let joint = psi.tensor_with_idler(I).unwrap();
        assert_eq!(joint.amplitude(&BasisLabel::pair(S1, I)), Some(c(0.6)));
        assert_eq!(joint.amplitude(&BasisLabel::pair(S2, I)), Some(c(0.8)));
        let single = PureState::basis_state(S1).tensor_with_idler(I).unwrap();
        assert_eq!(single.entries(), &[(BasisLabel::pair(S1, I), c(1.0))]);
        assert!(psi.tensor_with_idler(S1).is_err());
        assert!(matches!(joint.tensor_with_idler(I2), Err(Error::NotOnePhoton)));
    }

    #[test]
    fn inner_products() {
        let h = FRAC_1_SQRT_2;
        let psi = PureState::make_superposition(c(h), S1, c(h), S2).unwrap();
        assert!((psi.inner_product(&psi).unwrap() - 1.0).norm() < 1e-15);
        let e1 = PureState::make_superposition(c(1.0), S1, c(0.0), S2).unwrap();
        let e2 = PureState::make_superposition(c(0.0), S1, c(1.0), S2).unwrap();
        assert_eq!(e1.inner_product(&e2).unwrap(), c(0.0));
        assert!((psi.inner_product(&e1).unwrap() - h).norm() < 1e-15);
        let other = PureState::basis_state(S1);
        assert!(matches!(psi.inner_product(&other), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn canonical_order_and_global_phase_equality() {
        let a = PureState::make_superposition(c(0.6), S1, c(0.8), S2).unwrap();
        let b = PureState::make_superposition(c(0.8), S2, c(0.6), S1).unwrap();
        assert_eq!(a, b);
        let rotated = a.with_global_phase(0.3);
        assert_ne!(a, rotated);
        for ((_, x), (_, y)) in a.entries().iter().zip(rotated.entries()) {
            assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn json_layout() {
        let psi = PureState::make_entangled_pair([(c(0.6), S1, I1), (Amplitude::new(0.0, 0.8), S2, I2)])
            .unwrap();
        let text = serde_json::to_string(&psi).unwrap();
        assert_eq!(
            text,
            r#"{"basis":["s1|i1","s2|i2"],"amplitudes":[[0.6,0.0],[0.0,0.8]]}"#
        );
        let back: PureState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, psi);
        let bad = r#"{"basis":["s1"],"amplitudes":[[0.5,0.0]]}"#;
        assert!(serde_json::from_str::<PureState>(bad).is_err());
    }

    #[test]
    fn phase_shift_reduction() {
        let p = PhaseShift::new(S1, -std::f64::consts::FRAC_PI_2);
        assert!((p.reduced_phi() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((p.factor().norm() - 1.0).abs() < 1e-15);
    }
}
