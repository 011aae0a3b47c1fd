//! Parameter sweeps over `(ε, χ, φ)` and their CSV export.
//!
//! Every statistic in a sweep row comes from propagating the source state
//! through the optical network; [`crate::verify`] checks the same grid
//! against the closed forms.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use crate::closed_form::{visibility, CoincidenceProbs, Ratio};
use crate::density::DensityMatrix;
use crate::error::Result;
use crate::experiments::{build_owzm, build_single, build_zwm, outcome_distribution};
use crate::state::{ModeLabel, PureState, S, S_PRIME};

/// Parameter grid; `ε` and `χ` include both endpoints of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub epsilons: Vec<f64>,
    pub chis: Vec<f64>,
    pub phis: Vec<f64>,
}

impl Default for Grid {
    /// `ε, χ ∈ {0, 0.05, …, 1}`, `φ ∈ {0, π/36, …, 2π}`.
    fn default() -> Self {
        Grid {
            epsilons: unit_steps(20),
            chis: unit_steps(20),
            phis: (0..=72).map(|k| k as f64 * PI / 36.0).collect(),
        }
    }
}

/// `{0, 1/n, …, 1}` computed as `k/n` so the endpoints are exact.
pub fn unit_steps(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// `steps + 1` phases spanning `[0, 2π]`.
pub fn full_turn(steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| TAU * k as f64 / steps as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub chi: Option<f64>,
    pub phi: f64,
    pub p_s: f64,
    pub p_sp: f64,
    pub ratio_single: Ratio,
    pub coincidences: Option<CoincidenceProbs>,
    pub ratio_coinc: Option<Ratio>,
    pub visibility: f64,
}

fn signal_singles(state: &PureState) -> Result<(f64, f64)> {
    let rho = DensityMatrix::from_pure(state);
    let rho = match state.kind() {
        crate::state::StateKind::OnePhoton => rho,
        crate::state::StateKind::TwoPhoton => rho.partial_trace_idler()?,
    };
    Ok((
        rho.detection_probability(&ModeLabel::from(S))?,
        rho.detection_probability(&ModeLabel::from(S_PRIME))?,
    ))
}

fn row(epsilon: f64, chi: Option<f64>, phi: f64, state: &PureState) -> Result<SweepRow> {
    let (p_s, p_sp) = signal_singles(state)?;
    let coincidences = match chi {
        Some(_) => Some(outcome_distribution(state)?.coincidences()),
        None => None,
    };
    Ok(SweepRow {
        epsilon,
        chi,
        phi,
        p_s,
        p_sp,
        ratio_single: Ratio::from_probs(p_s, p_sp),
        ratio_coinc: coincidences.map(|c| Ratio::from_probs(c.s_i, c.sp_i)),
        coincidences,
        visibility: visibility(epsilon)?,
    })
}

/// Single photon through phase and `BS_s`: the `P_s/P_s'` fringe.
pub fn single_sweep(epsilons: &[f64], phis: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(epsilons.len() * phis.len());
    for &eps in epsilons {
        for &phi in phis {
            rows.push(row(eps, None, phi, &build_single(eps, phi)?)?);
        }
    }
    Ok(rows)
}

/// Entangled pair through both splitters: flat singles, fringing
/// coincidences.
pub fn owzm_sweep(epsilons: &[f64], chis: &[f64], phis: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(epsilons.len() * chis.len() * phis.len());
    for &eps in epsilons {
        for &chi in chis {
            for &phi in phis {
                rows.push(row(eps, Some(chi), phi, &build_owzm(eps, chi, phi)?)?);
            }
        }
    }
    Ok(rows)
}

/// Separable source: the single-photon fringe survives in the singles.
pub fn zwm_sweep(epsilons: &[f64], phis: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(epsilons.len() * phis.len());
    for &eps in epsilons {
        for &phi in phis {
            let state = build_zwm(eps, phi)?;
            let mut r = row(eps, None, phi, &state)?;
            let c = outcome_distribution(&state)?.coincidences();
            r.ratio_coinc = Some(Ratio::from_probs(c.s_i, c.sp_i));
            r.coincidences = Some(c);
            rows.push(r);
        }
    }
    Ok(rows)
}

pub const SWEEP_COLUMNS: &str =
    "epsilon,chi,phi,P_s,P_sp,ratio_single,P_si,P_spi,P_sip,P_spip,ratio_coinc,visibility";

/// Header comment, column line, one line per row. Floats are printed in
/// shortest round-trip form; absent values are empty fields and unbounded
/// ratios are `inf`.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: &mut W, header: &str) -> std::io::Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "{SWEEP_COLUMNS}")?;
    for r in rows {
        let chi = r.chi.map_or_else(String::new, |c| format!("{c:?}"));
        let coinc = r.coincidences.map_or_else(
            || ",,,".to_string(),
            |c| format!("{:?},{:?},{:?},{:?}", c.s_i, c.sp_i, c.s_ip, c.sp_ip),
        );
        let ratio_coinc = r.ratio_coinc.map_or_else(String::new, |x| x.to_string());
        writeln!(
            out,
            "{:?},{chi},{:?},{:?},{:?},{},{coinc},{ratio_coinc},{:?}",
            r.epsilon, r.phi, r.p_s, r.p_sp, r.ratio_single, r.visibility
        )?;
    }
    Ok(())
}
