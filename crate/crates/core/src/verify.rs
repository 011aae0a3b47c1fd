//! Oracle-equivalence checks: amplitude propagation against the closed
//! forms, plus the structural identities (flat singles, no-signaling,
//! normalization) over a full parameter grid.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use crate::closed_form::{
    eraser_amplitudes, eraser_coincidence_probs, marker_coincidence_ratio, single_amplitudes, single_probs,
    single_ratio, FringeParams, Ratio,
};
use crate::density::{coincidence_probability, DensityMatrix};
use crate::error::Result;
use crate::experiments::{build_owzm, build_owzm_which_path, build_single, build_zwm, outcome_distribution};
use crate::state::{BasisLabel, ModeLabel, I, I1, I_PRIME, S, S_PRIME};
use crate::sweep::Grid;

/// Tolerance for identities that hold to rounding error.
pub const EXACT: f64 = 1e-12;
/// Tolerance for closed-form vs propagated probabilities and ratios.
pub const ORACLE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub points: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} max deviation {:.3e} (tolerance {:.0e}, {} points)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_deviation,
            self.tolerance,
            self.points
        )
    }
}

/// Running maximum; NaN counts as an infinite deviation.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    max: f64,
    points: usize,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker { name, tolerance, max: 0.0, points: 0 }
    }

    fn record(&mut self, deviation: f64) {
        self.points += 1;
        let d = if deviation.is_nan() { f64::INFINITY } else { deviation };
        self.max = self.max.max(d);
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            max_deviation: self.max,
            tolerance: self.tolerance,
            points: self.points,
        }
    }
}

fn mode(name: &str) -> ModeLabel {
    ModeLabel::from(name)
}

/// Single-system checks over `ε × φ`.
pub fn check_single_system(grid: &Grid) -> Result<Vec<CheckResult>> {
    let mut amps = Tracker::new("single/amplitudes", EXACT);
    let mut probs = Tracker::new("single/probabilities", EXACT);
    let mut ratio = Tracker::new("single/ratio", ORACLE);
    let (s, sp) = (BasisLabel::Single(mode(S)), BasisLabel::Single(mode(S_PRIME)));
    for &eps in &grid.epsilons {
        for &phi in &grid.phis {
            let state = build_single(eps, phi)?;
            let (a_s, a_sp) = single_amplitudes(eps, phi)?;
            let got_s = state.amplitude(&s).unwrap_or_default();
            let got_sp = state.amplitude(&sp).unwrap_or_default();
            amps.record((got_s - a_s).norm().max((got_sp - a_sp).norm()));

            let rho = DensityMatrix::from_pure(&state);
            let (p_s, p_sp) = (rho.detection_probability(&mode(S))?, rho.detection_probability(&mode(S_PRIME))?);
            let (c_s, c_sp) = single_probs(eps, phi)?;
            probs.record((p_s - c_s).abs().max((p_sp - c_sp).abs()));
            ratio.record(Ratio::from_probs(p_s, p_sp).deviation(&single_ratio(eps, phi)?));
        }
    }
    Ok(vec![amps.finish(), probs.finish(), ratio.finish()])
}

/// Entangled-pair checks over `ε × χ × φ`.
pub fn check_entangled(grid: &Grid) -> Result<Vec<CheckResult>> {
    let mut flat = Tracker::new("owzm/flat-singles", EXACT);
    let mut purity = Tracker::new("owzm/reduced-purity", EXACT);
    let mut amps = Tracker::new("owzm/joint-amplitudes", EXACT);
    let mut probs = Tracker::new("owzm/coincidences", ORACLE);
    let mut ratio = Tracker::new("owzm/coincidence-ratio", ORACLE);
    let mut nosig = Tracker::new("owzm/no-signaling", EXACT);
    let mut total = Tracker::new("owzm/four-outcome-sum", EXACT);
    let mut chi0 = Tracker::new("owzm/limit-chi-0", ORACLE);
    let mut balanced = Tracker::new("owzm/limit-chi-balanced", ORACLE);

    let labels = [
        BasisLabel::pair(S, I),
        BasisLabel::pair(S_PRIME, I),
        BasisLabel::pair(S, I_PRIME),
        BasisLabel::pair(S_PRIME, I_PRIME),
    ];
    for &eps in &grid.epsilons {
        for &chi in &grid.chis {
            for &phi in &grid.phis {
                let params = FringeParams::new(eps, chi, phi)?;
                let state = build_owzm(eps, chi, phi)?;

                let reduced = DensityMatrix::from_pure(&state).partial_trace_idler()?;
                let p_s = reduced.detection_probability(&mode(S))?;
                let p_sp = reduced.detection_probability(&mode(S_PRIME))?;
                flat.record((p_s - 0.5).abs().max((p_sp - 0.5).abs()));
                purity.record((reduced.purity() - 0.5).abs());

                let cf = eraser_amplitudes(&params)?;
                let want = [cf.s_i, cf.sp_i, cf.s_ip, cf.sp_ip];
                let dev = labels
                    .iter()
                    .zip(want)
                    .map(|(l, a)| (state.amplitude(l).unwrap_or_default() - a).norm())
                    .fold(0.0, f64::max);
                amps.record(dev);

                let dist = outcome_distribution(&state)?;
                let got = dist.coincidences();
                let closed = eraser_coincidence_probs(&params)?;
                let dev = got
                    .as_array()
                    .iter()
                    .zip(closed.as_array())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                probs.record(dev);
                ratio.record(
                    Ratio::from_probs(got.s_i, got.sp_i).deviation(&Ratio::from_probs(closed.s_i, closed.sp_i)),
                );

                let (p_i, p_ip) = dist.idler_marginals();
                nosig.record((p_i - 0.5).abs().max((p_ip - 0.5).abs()));
                total.record((got.sum() - 1.0).abs().max((closed.sum() - 1.0).abs()));
            }
        }
        for &phi in &grid.phis {
            // χ = 0: Bob's i detector is the i1 which-path marker
            let got = outcome_distribution(&build_owzm(eps, 0.0, phi)?)?.coincidences();
            let closed = eraser_coincidence_probs(&FringeParams::new(eps, 0.0, phi)?)?;
            let marker = marker_coincidence_ratio(eps)?;
            chi0.record(Ratio::from_probs(got.s_i, got.sp_i).deviation(&marker));
            chi0.record(Ratio::from_probs(closed.s_i, closed.sp_i).deviation(&marker));

            // balanced eraser: the single-photon fringe shifted by π/2
            let params = FringeParams::new(eps, FRAC_1_SQRT_2, phi)?;
            let got = outcome_distribution(&build_owzm(eps, FRAC_1_SQRT_2, phi)?)?.coincidences();
            let closed = eraser_coincidence_probs(&params)?;
            let shifted = single_ratio(eps, phi + FRAC_PI_2)?;
            balanced.record(Ratio::from_probs(got.s_i, got.sp_i).deviation(&shifted));
            balanced.record(Ratio::from_probs(closed.s_i, closed.sp_i).deviation(&shifted));
        }
    }
    Ok(vec![
        flat.finish(),
        purity.finish(),
        amps.finish(),
        probs.finish(),
        ratio.finish(),
        nosig.finish(),
        total.finish(),
        chi0.finish(),
        balanced.finish(),
    ])
}

/// Which-path (no idler splitter) checks over `ε × φ`.
pub fn check_which_path(grid: &Grid) -> Result<Vec<CheckResult>> {
    let mut ratio = Tracker::new("marker/ratio", ORACLE);
    let mut constancy = Tracker::new("marker/phi-independence", EXACT);
    let mut flat = Tracker::new("marker/flat-singles", EXACT);
    for &eps in &grid.epsilons {
        let reference = build_owzm_which_path(eps, 0.0)?;
        let p0 = coincidence_probability(&reference, &mode(S), &mode(I1))?;
        for &phi in &grid.phis {
            let state = build_owzm_which_path(eps, phi)?;
            let p = coincidence_probability(&state, &mode(S), &mode(I1))?;
            let q = coincidence_probability(&state, &mode(S_PRIME), &mode(I1))?;
            ratio.record(Ratio::from_probs(p, q).deviation(&marker_coincidence_ratio(eps)?));
            constancy.record((p - p0).abs());
            let reduced = DensityMatrix::from_pure(&state).partial_trace_idler()?;
            flat.record((reduced.detection_probability(&mode(S))? - 0.5).abs());
        }
    }
    Ok(vec![ratio.finish(), constancy.finish(), flat.finish()])
}

/// Separable-source checks over `ε × φ`.
pub fn check_separable(grid: &Grid) -> Result<Vec<CheckResult>> {
    let mut purity = Tracker::new("zwm/reduced-purity", EXACT);
    let mut ratio = Tracker::new("zwm/singles-ratio", ORACLE);
    for &eps in &grid.epsilons {
        for &phi in &grid.phis {
            let reduced = DensityMatrix::from_pure(&build_zwm(eps, phi)?).partial_trace_idler()?;
            purity.record((reduced.purity() - 1.0).abs());
            let got = Ratio::from_probs(
                reduced.detection_probability(&mode(S))?,
                reduced.detection_probability(&mode(S_PRIME))?,
            );
            ratio.record(got.deviation(&single_ratio(eps, phi)?));
        }
    }
    Ok(vec![purity.finish(), ratio.finish()])
}

/// Every check over `grid`.
pub fn run_all(grid: &Grid) -> Result<Vec<CheckResult>> {
    let mut results = check_single_system(grid)?;
    results.extend(check_which_path(grid)?);
    results.extend(check_entangled(grid)?);
    results.extend(check_separable(grid)?);
    Ok(results)
}
