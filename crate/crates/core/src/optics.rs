//! Lossless optical elements acting on [`PureState`]s.
//!
//! Beam-splitter convention: amplitude transmission `T = τ` on the diagonal,
//! reflection `R = i√(1−τ²)` off the diagonal,
//!
//! ```text
//! a(out1) = T·a(in1) + R·a(in2)
//! a(out2) = R·a(in1) + T·a(in2)
//! ```
//!
//! With `BS_s` wired `s1,s2 → s',s` and `BS_i` wired `i1,i2 → i',i` this
//! gives the textbook two-crystal amplitudes term for term. Elements never
//! mutate their input; every application returns a fresh state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Amplitude, BasisLabel, ModeLabel, PhaseShift, PureState, I, I1, I2, I_PRIME, S, S1, S2, S_PRIME};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeamSplitterRepr", into = "BeamSplitterRepr")]
pub struct BeamSplitter {
    tau: f64,
    in1: ModeLabel,
    in2: ModeLabel,
    out1: ModeLabel,
    out2: ModeLabel,
}

impl BeamSplitter {
    pub fn new(
        tau: f64,
        inputs: [ModeLabel; 2],
        outputs: [ModeLabel; 2],
    ) -> Result<Self> {
        check_unit_interval("tau", tau)?;
        let [in1, in2] = inputs;
        let [out1, out2] = outputs;
        if in1 == in2 || out1 == out2 {
            return Err(Error::Basis(format!(
                "beam splitter ports must be distinct: in [{in1}, {in2}], out [{out1}, {out2}]"
            )));
        }
        Ok(BeamSplitter {
            tau,
            in1,
            in2,
            out1,
            out2,
        })
    }

    /// Alice's splitter `BS_s(ε)`: `s1, s2 → s', s`.
    pub fn signal(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, [S1.into(), S2.into()], [S_PRIME.into(), S.into()])
    }

    /// Bob's splitter `BS_i(χ)`: `i1, i2 → i', i` (`i1` transmits to `i'`).
    pub fn idler(chi: f64) -> Result<Self> {
        Self::new(chi, [I1.into(), I2.into()], [I_PRIME.into(), I.into()])
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn inputs(&self) -> [&ModeLabel; 2] {
        [&self.in1, &self.in2]
    }

    pub fn outputs(&self) -> [&ModeLabel; 2] {
        [&self.out1, &self.out2]
    }

    pub fn transmission(&self) -> Amplitude {
        Amplitude::new(self.tau, 0.0)
    }

    pub fn reflection(&self) -> Amplitude {
        Amplitude::new(0.0, (1.0 - self.tau * self.tau).max(0.0).sqrt())
    }

    /// Intensity transmittance `τ²`.
    pub fn transmittance(&self) -> f64 {
        self.tau * self.tau
    }

    /// Rows `(out1, out2)`, columns `(in1, in2)`.
    pub fn matrix(&self) -> [[Amplitude; 2]; 2] {
        let (t, r) = (self.transmission(), self.reflection());
        [[t, r], [r, t]]
    }
}

#[derive(Serialize, Deserialize)]
struct BeamSplitterRepr {
    tau: f64,
    #[serde(rename = "in")]
    inputs: [ModeLabel; 2],
    #[serde(rename = "out")]
    outputs: [ModeLabel; 2],
}

impl From<BeamSplitter> for BeamSplitterRepr {
    fn from(bs: BeamSplitter) -> Self {
        BeamSplitterRepr {
            tau: bs.tau,
            inputs: [bs.in1, bs.in2],
            outputs: [bs.out1, bs.out2],
        }
    }
}

impl TryFrom<BeamSplitterRepr> for BeamSplitter {
    type Error = Error;

    fn try_from(r: BeamSplitterRepr) -> Result<Self> {
        BeamSplitter::new(r.tau, r.inputs, r.outputs)
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    Phase(PhaseShift),
    Bs(BeamSplitter),
}

impl Element {
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        match self {
            Element::Phase(p) => apply_phase(state, &p.mode, p.phi),
            Element::Bs(bs) => apply_beam_splitter(state, bs),
        }
    }
}

/// Ordered element list, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpticalNetwork {
    elements: Vec<Element>,
}

impl OpticalNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn phase(mut self, mode: impl Into<ModeLabel>, phi: f64) -> Self {
        self.elements.push(Element::Phase(PhaseShift::new(mode, phi)));
        self
    }

    pub fn beam_splitter(mut self, bs: BeamSplitter) -> Self {
        self.elements.push(Element::Bs(bs));
        self
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Network(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serializes")
    }
}

impl FromIterator<Element> for OpticalNetwork {
    fn from_iter<T: IntoIterator<Item = Element>>(iter: T) -> Self {
        OpticalNetwork {
            elements: iter.into_iter().collect(),
        }
    }
}

/// Multiplies every amplitude whose label contains `mode` by `e^{iφ}`.
pub fn apply_phase(state: &PureState, mode: &ModeLabel, phi: f64) -> Result<PureState> {
    if !state.contains_mode(mode) {
        return Err(Error::UnknownMode(mode.clone()));
    }
    let factor = Amplitude::from_polar(1.0, phi);
    let entries = state
        .entries()
        .iter()
        .map(|(l, a)| {
            let a = if l.contains(mode) { a * factor } else { *a };
            (l.clone(), a)
        })
        .collect();
    PureState::assemble(entries)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Signal,
    Idler,
}

fn split(label: &BasisLabel, side: Side) -> (&ModeLabel, Option<&ModeLabel>) {
    match (side, label) {
        (Side::Signal, BasisLabel::Single(m)) => (m, None),
        (Side::Signal, BasisLabel::Pair { signal, idler }) => (signal, Some(idler)),
        (Side::Idler, BasisLabel::Pair { signal, idler }) => (idler, Some(signal)),
        (Side::Idler, BasisLabel::Single(_)) => unreachable!("idler side needs pair labels"),
    }
}

fn join(side: Side, mode: &ModeLabel, other: Option<&ModeLabel>) -> BasisLabel {
    match (side, other) {
        (Side::Signal, None) => BasisLabel::Single(mode.clone()),
        (Side::Signal, Some(i)) => BasisLabel::pair(mode.clone(), i.clone()),
        (Side::Idler, Some(s)) => BasisLabel::pair(s.clone(), mode.clone()),
        (Side::Idler, None) => unreachable!("idler side needs pair labels"),
    }
}

/// Mixes `in1`/`in2` into `out1`/`out2`, independently for every fixed
/// label of the other subsystem. An input port absent from the basis
/// carries vacuum; it is an error only if neither port is present.
pub fn apply_beam_splitter(state: &PureState, bs: &BeamSplitter) -> Result<PureState> {
    let is_input = |m: &ModeLabel| m == &bs.in1 || m == &bs.in2;
    let on_signal = state.basis().any(|l| is_input(l.signal()));
    let on_idler = state.basis().any(|l| l.idler().is_some_and(is_input));
    let side = match (on_signal, on_idler) {
        (true, false) => Side::Signal,
        (false, true) => Side::Idler,
        (false, false) => return Err(Error::UnknownMode(bs.in1.clone())),
        (true, true) => {
            return Err(Error::Basis(format!(
                "beam splitter inputs {}/{} appear on both subsystems",
                bs.in1, bs.in2
            )))
        }
    };

    let zero = Amplitude::new(0.0, 0.0);
    let mut mixed: BTreeMap<Option<&ModeLabel>, [Amplitude; 2]> = BTreeMap::new();
    let mut entries = Vec::with_capacity(state.len() * 2);
    for (label, amp) in state.entries() {
        let (mode, other) = split(label, side);
        if mode == &bs.in1 {
            mixed.entry(other).or_insert([zero; 2])[0] += amp;
        } else if mode == &bs.in2 {
            mixed.entry(other).or_insert([zero; 2])[1] += amp;
        } else if mode == &bs.out1 || mode == &bs.out2 {
            return Err(Error::Basis(format!(
                "beam splitter output {mode} is already occupied by a bystander term"
            )));
        } else {
            entries.push((label.clone(), *amp));
        }
    }

    let [[t11, t12], [t21, t22]] = bs.matrix();
    for (other, [a1, a2]) in mixed {
        entries.push((join(side, &bs.out1, other), t11 * a1 + t12 * a2));
        entries.push((join(side, &bs.out2, other), t21 * a1 + t22 * a2));
    }
    PureState::assemble(entries)
}

/// Left fold of element applications.
pub fn evaluate_network(initial: &PureState, net: &OpticalNetwork) -> Result<PureState> {
    net.elements
        .iter()
        .try_fold(initial.clone(), |state, element| element.apply(&state))
}
