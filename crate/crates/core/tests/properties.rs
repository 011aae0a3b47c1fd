use std::f64::consts::TAU;

use num_complex::Complex64;
use pairsim::closed_form::{single_ratio, visibility};
use pairsim::density::{coincidence_probability, DensityMatrix};
use pairsim::experiments::{build_owzm, outcome_distribution};
use pairsim::optics::{apply_beam_splitter, apply_phase, evaluate_network, BeamSplitter, OpticalNetwork};
use pairsim::state::{PureState, I, I1, I2, I_PRIME, S, S1, S2, S_PRIME};
use proptest::prelude::*;

fn normalized(raw: &[(f64, f64)]) -> Vec<Complex64> {
    let v: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

prop_compose! {
    fn two_photon_input()(raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)) -> PureState {
        let a = normalized(&raw);
        PureState::make_entangled_pair([
            (a[0], S1, I1), (a[1], S1, I2), (a[2], S2, I1), (a[3], S2, I2),
        ]).unwrap()
    }
}

prop_compose! {
    fn one_photon_input()(raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)) -> PureState {
        let a = normalized(&raw);
        PureState::make_superposition(a[0], S1, a[1], S2).unwrap()
    }
}

fn full_network(eps: f64, chi: f64, phi: f64) -> OpticalNetwork {
    OpticalNetwork::new()
        .phase(S1, phi)
        .beam_splitter(BeamSplitter::signal(eps).unwrap())
        .beam_splitter(BeamSplitter::idler(chi).unwrap())
}

proptest! {
    #[test]
    fn networks_preserve_norm(state in two_photon_input(), eps in 0.0..=1.0f64, chi in 0.0..=1.0f64, phi in -10.0..10.0f64) {
        let out = evaluate_network(&state, &full_network(eps, chi, phi)).unwrap();
        prop_assert!((out.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_photon_norm(state in one_photon_input(), eps in 0.0..=1.0f64, phi in -10.0..10.0f64) {
        let net = OpticalNetwork::new().phase(S2, phi).beam_splitter(BeamSplitter::signal(eps).unwrap());
        let out = evaluate_network(&state, &net).unwrap();
        prop_assert!((out.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_elements_commute(state in two_photon_input(), chi in 0.0..=1.0f64, phi in -10.0..10.0f64) {
        let bs = BeamSplitter::idler(chi).unwrap();
        let a = apply_beam_splitter(&apply_phase(&state, &S1.into(), phi).unwrap(), &bs).unwrap();
        let b = apply_phase(&apply_beam_splitter(&state, &bs).unwrap(), &S1.into(), phi).unwrap();
        for ((la, x), (lb, y)) in a.entries().iter().zip(b.entries()) {
            prop_assert_eq!(la, lb);
            prop_assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn global_phase_leaves_probabilities(state in two_photon_input(), theta in 0.0..TAU, eps in 0.0..=1.0f64, chi in 0.0..=1.0f64) {
        let net = full_network(eps, chi, 0.4);
        let a = evaluate_network(&state, &net).unwrap();
        let b = evaluate_network(&state.with_global_phase(theta), &net).unwrap();
        for ((_, x), (_, y)) in a.entries().iter().zip(b.entries()) {
            prop_assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in two_photon_input(), b in two_photon_input()) {
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-15);
        prop_assert!((a.inner_product(&a).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn marginals_are_consistent(state in two_photon_input(), eps in 0.0..=1.0f64, chi in 0.0..=1.0f64, phi in 0.0..TAU) {
        let out = evaluate_network(&state, &full_network(eps, chi, phi)).unwrap();
        let reduced = DensityMatrix::from_pure(&out).partial_trace_idler().unwrap();
        for m in [S, S_PRIME] {
            let summed: f64 = [I, I_PRIME]
                .iter()
                .map(|i| coincidence_probability(&out, &m.into(), &(*i).into()).unwrap())
                .sum();
            prop_assert!((reduced.detection_probability(&m.into()).unwrap() - summed).abs() < 1e-12);
        }
        let p = reduced.purity();
        prop_assert!(p >= 0.5 - 1e-12 && p <= 1.0 + 1e-12);
        prop_assert!(reduced.eigenvalues().iter().all(|&e| e >= -1e-12));
    }

    #[test]
    fn entangled_source_has_flat_singles_and_bob_marginals(eps in 0.0..=1.0f64, chi in 0.0..=1.0f64, phi in -10.0..10.0f64) {
        let d = outcome_distribution(&build_owzm(eps, chi, phi).unwrap()).unwrap();
        let (ps, psp) = d.signal_marginals();
        let (pi, pip) = d.idler_marginals();
        for p in [ps, psp, pi, pip] {
            prop_assert!((p - 0.5).abs() < 1e-12);
        }
        prop_assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact(state in two_photon_input(), eps in 0.0..=1.0f64, phi in -10.0..10.0f64) {
        let out = evaluate_network(&state, &full_network(eps, 0.3, phi)).unwrap();
        let text = serde_json::to_string(&out).unwrap();
        let back: PureState = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &out);
        let rho = DensityMatrix::from_pure(&out);
        let back: DensityMatrix = serde_json::from_str(&serde_json::to_string(&rho).unwrap()).unwrap();
        prop_assert_eq!(back, rho);
    }

    #[test]
    fn single_ratio_never_exceeds_its_extremum(eps in 0.0..=1.0f64, phi in 0.0..TAU) {
        let v = visibility(eps).unwrap();
        prop_assume!(v < 0.999);
        let r = single_ratio(eps, phi).unwrap().value().unwrap();
        prop_assert!(r <= (1.0 + v) / (1.0 - v) * (1.0 + 1e-12));
        prop_assert!(r >= (1.0 - v) / (1.0 + v) * (1.0 - 1e-12));
    }
}
