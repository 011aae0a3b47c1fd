use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use pairsim::closed_form::{marker_coincidence_ratio, single_ratio};
use pairsim::experiments::{
    analyze, run_delayed_choice, EventLog, EventSampler, ExperimentConfig, ExperimentKind, IdlerOutcome, PhiSweep,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sweep(start: f64, stop: f64, steps: usize) -> PhiSweep {
    PhiSweep { start, stop, steps }
}

#[test]
fn bob_marginal_is_half_for_any_menu() {
    let config = ExperimentConfig {
        phi: sweep(0.0, PI, 3),
        epsilon_menu: vec![0.05, 0.5, 0.99],
        chi: 0.35,
        events_per_point: 250_000,
        seed: 11,
        ..ExperimentConfig::default()
    };
    let log = run_delayed_choice(&config).unwrap();
    assert_eq!(log.events.len(), 1_000_000);
    let n_i = log.events.iter().filter(|e| e.bob == IdlerOutcome::I).count() as f64;
    let rate = n_i / log.events.len() as f64;
    assert!((rate - 0.5).abs() < 0.005, "P(bob = i) = {rate}");
}

#[test]
fn which_path_stratum_recovers_marker_ratio() {
    let config = ExperimentConfig {
        phi: sweep(0.0, 1.0, 1),
        epsilon_menu: vec![0.6, 0.9],
        chi: 0.0,
        events_per_point: 200_000,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let stats = analyze(&run_delayed_choice(&config).unwrap()).unwrap();
    let want = marker_coincidence_ratio(0.6).unwrap();
    assert!((want.value().unwrap() - 16.0 / 9.0).abs() < 1e-12);
    for row in stats.strata.iter().filter(|s| s.epsilon == Some(0.6)) {
        let est = row.coinc_ratio_i();
        assert_eq!(est.agrees_with(&want, 3.0), Some(true), "{est:?} vs 16/9");
    }
}

#[test]
fn separable_source_shows_single_photon_fringe() {
    let eps = 0.6;
    let config = ExperimentConfig {
        kind: ExperimentKind::Zwm,
        phi: sweep(0.0, 1.5 * PI, 6),
        epsilon_menu: vec![eps],
        events_per_point: 100_000,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let stats = analyze(&run_delayed_choice(&config).unwrap()).unwrap();
    for row in &stats.pooled {
        let want = single_ratio(eps, row.phi).unwrap();
        let est = row.singles_ratio();
        assert_eq!(est.agrees_with(&want, 4.0), Some(true), "phi {} {est:?} vs {want}", row.phi);
    }
    // at sin φ = 1 the ratio is far from the entangled case's flat 1
    let quarter = stats.pooled.iter().find(|r| (r.phi - FRAC_PI_2).abs() < 1e-12).unwrap();
    assert!(quarter.singles_ratio().value().unwrap() < 0.05);
}

#[test]
fn single_entry_menu_matches_fixed_epsilon_run() {
    let base = ExperimentConfig {
        kind: ExperimentKind::Owzm,
        phi: sweep(0.0, PI, 2),
        epsilon_menu: vec![0.4],
        chi: 0.5,
        events_per_point: 20_000,
        seed: 99,
    };
    let fixed = run_delayed_choice(&base).unwrap();

    // the same sampler driven directly with a one-entry menu
    for (k, phi) in base.phi_points().into_iter().enumerate() {
        let sampler = EventSampler::new(ExperimentKind::DelayedChoice, phi, &[0.4], 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        rng.set_stream(k as u64);
        let n = base.events_per_point;
        for j in 0..n {
            let seq = k as u64 * n + j;
            assert_eq!(sampler.sample(&mut rng, seq), fixed.events[seq as usize]);
        }
    }
}

#[test]
fn balanced_eraser_conditional_hits_fringe_extreme() {
    // P(s|i) = (1 − V cos φ)/2: with V = 1 and φ = π Alice's s detector always fires
    let sampler = EventSampler::new(ExperimentKind::DelayedChoice, PI, &[FRAC_1_SQRT_2], FRAC_1_SQRT_2).unwrap();
    assert!((sampler.conditional_s(0, IdlerOutcome::I) - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s_given_i = 0;
    let mut n_i = 0;
    for seq in 0..10_000 {
        let e = sampler.sample(&mut rng, seq);
        if e.bob == IdlerOutcome::I {
            n_i += 1;
            s_given_i += usize::from(e.alice == pairsim::experiments::SignalOutcome::S);
        }
    }
    assert_eq!(s_given_i, n_i);
}

#[test]
fn written_log_reanalyzes_identically() {
    let config = ExperimentConfig {
        phi: sweep(0.0, PI, 4),
        events_per_point: 5_000,
        ..ExperimentConfig::default()
    };
    let log = run_delayed_choice(&config).unwrap();
    let bytes = log.to_bytes(&format!("pairsim test {}", config.describe()));
    let back = EventLog::read_from(&bytes[..]).unwrap();
    assert_eq!(analyze(&back).unwrap(), analyze(&log).unwrap());
}
