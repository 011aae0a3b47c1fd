//! Delayed-choice event generation.
//!
//! Each event is drawn in the protocol's causal order: Bob's idler click,
//! the trigger to Alice, her QRNG choice of `ε`, and only then her signal
//! click from the conditional distribution given Bob's outcome. Drawing Bob
//! first is exact because his marginal does not depend on `ε`; the sampler
//! checks this for every configured phase before generating anything.
//!
//! The QRNG is ChaCha8 (`rand_chacha`). Phase point `k` draws from stream
//! `k` of the generator seeded with `seed`, so the log does not depend on
//! how phase points are distributed over threads.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::builders::{build_owzm, build_zwm, outcome_distribution};
use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

/// Tolerance on the ε-independence of Bob's marginal.
const NO_SIGNALING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdlerOutcome {
    I,
    IPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalOutcome {
    S,
    SPrime,
}

impl fmt::Display for IdlerOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdlerOutcome::I => "i",
            IdlerOutcome::IPrime => "i'",
        })
    }
}

impl FromStr for IdlerOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(IdlerOutcome::I),
            "i'" => Ok(IdlerOutcome::IPrime),
            _ => Err(Error::Parse(format!("bad idler outcome {s:?}"))),
        }
    }
}

impl fmt::Display for SignalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalOutcome::S => "s",
            SignalOutcome::SPrime => "s'",
        })
    }
}

impl FromStr for SignalOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(SignalOutcome::S),
            "s'" => Ok(SignalOutcome::SPrime),
            _ => Err(Error::Parse(format!("bad signal outcome {s:?}"))),
        }
    }
}

/// Protocol steps of one event, in causal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProtocolStep {
    BobDetects,
    TriggerSent,
    EpsilonChosen,
    AliceDetects,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub seq: u64,
    pub phi: f64,
    pub bob: IdlerOutcome,
    pub epsilon: f64,
    pub alice: SignalOutcome,
}

impl Event {
    /// Logical timestamp of a protocol step; strictly increasing in
    /// `(seq, step)`.
    pub fn logical_time(&self, step: ProtocolStep) -> u64 {
        self.seq * 4 + step as u64
    }

    fn to_line(self) -> String {
        format!("{},{:?},{},{:?},{}", self.seq, self.phi, self.bob, self.epsilon, self.alice)
    }

    fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        let [seq, phi, bob, eps, alice] = fields[..] else {
            return Err(Error::Parse(format!("expected 5 fields in {line:?}")));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        Ok(Event {
            seq: seq.parse().map_err(|e| Error::Parse(format!("{seq:?}: {e}")))?,
            phi: num(phi)?,
            bob: bob.parse()?,
            epsilon: num(eps)?,
            alice: alice.parse()?,
        })
    }
}

/// Precomputed sampling tables for one phase point.
#[derive(Clone, Debug)]
pub struct EventSampler {
    phi: f64,
    /// `P(bob = i)`, identical for every menu entry.
    p_bob_i: f64,
    /// `(ε, P(s | i), P(s | i'))` per menu entry.
    menu: Vec<(f64, f64, f64)>,
}

impl EventSampler {
    pub fn new(kind: ExperimentKind, phi: f64, epsilon_choices: &[f64], chi: f64) -> Result<Self> {
        if epsilon_choices.is_empty() {
            return Err(Error::Config("empty epsilon menu".into()));
        }
        let mut p_bob_i = None;
        let mut menu = Vec::with_capacity(epsilon_choices.len());
        for &eps in epsilon_choices {
            let state = match kind {
                ExperimentKind::Zwm => build_zwm(eps, phi)?,
                ExperimentKind::Owzm | ExperimentKind::DelayedChoice => build_owzm(eps, chi, phi)?,
            };
            let dist = outcome_distribution(&state)?;
            let (p_i, p_ip) = dist.idler_marginals();
            match p_bob_i {
                None => p_bob_i = Some(p_i),
                Some(first) if (first - p_i).abs() > NO_SIGNALING_TOLERANCE => {
                    return Err(Error::SignalingDetected { phi, p_a: first, p_b: p_i })
                }
                Some(_) => {}
            }
            let conditional = |joint: f64, marginal: f64| if marginal > 0.0 { joint / marginal } else { 0.5 };
            menu.push((eps, conditional(dist.get(0, 0), p_i), conditional(dist.get(0, 1), p_ip)));
        }
        Ok(EventSampler {
            phi,
            p_bob_i: p_bob_i.expect("menu is nonempty"),
            menu,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn bob_marginal(&self) -> f64 {
        self.p_bob_i
    }

    /// `P(s | bob)` for menu entry `index`.
    pub fn conditional_s(&self, index: usize, bob: IdlerOutcome) -> f64 {
        let (_, given_i, given_ip) = self.menu[index];
        match bob {
            IdlerOutcome::I => given_i,
            IdlerOutcome::IPrime => given_ip,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, seq: u64) -> Event {
        let bob = if rng.gen::<f64>() < self.p_bob_i {
            IdlerOutcome::I
        } else {
            IdlerOutcome::IPrime
        };
        // trigger reaches Alice; QRNG fires only now
        let choice = rng.gen_range(0..self.menu.len());
        let alice = if rng.gen::<f64>() < self.conditional_s(choice, bob) {
            SignalOutcome::S
        } else {
            SignalOutcome::SPrime
        };
        Event {
            seq,
            phi: self.phi,
            bob,
            epsilon: self.menu[choice].0,
            alice,
        }
    }
}

/// One entangled-pair event with Alice's `ε` drawn from `epsilon_choices`
/// after Bob's detection.
pub fn sample_event<R: Rng + ?Sized>(rng: &mut R, phi: f64, epsilon_choices: &[f64], chi: f64) -> Result<Event> {
    let sampler = EventSampler::new(ExperimentKind::DelayedChoice, phi, epsilon_choices, chi)?;
    Ok(sampler.sample(rng, 0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventLog {
    pub config: ExperimentConfig,
    pub events: Vec<Event>,
}

const LOG_COLUMNS: &str = "seq,phi,bob,eps,alice";

impl EventLog {
    /// Header comment, column line, then one event per line.
    pub fn write_to<W: Write>(&self, out: &mut W, header: &str) -> std::io::Result<()> {
        writeln!(out, "# {header}")?;
        writeln!(out, "{LOG_COLUMNS}")?;
        for event in &self.events {
            writeln!(out, "{}", event.to_line())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self, header: &str) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.events.len() * 40);
        self.write_to(&mut buf, header).expect("writing to memory");
        buf
    }

    /// Reads a log written by [`EventLog::write_to`]; the configuration is
    /// recovered from the `key=value` settings in the header comment.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<Option<String>> {
            lines.next().transpose().map_err(|e| Error::Parse(e.to_string()))
        };
        let header = next()?.ok_or_else(|| Error::Parse("empty event log".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing header comment".into()))?;
        let config = ExperimentConfig::from_description(header)?;
        if next()?.as_deref() != Some(LOG_COLUMNS) {
            return Err(Error::Parse(format!("expected column line {LOG_COLUMNS:?}")));
        }
        let mut events = Vec::new();
        while let Some(line) = next()? {
            if !line.is_empty() {
                events.push(Event::parse_line(&line)?);
            }
        }
        Ok(EventLog { config, events })
    }
}

/// Runs `events_per_point` events at every phase point of the sweep.
pub fn run_delayed_choice(config: &ExperimentConfig) -> Result<EventLog> {
    config.validate()?;
    let points = config.phi_points();
    let samplers = points
        .iter()
        .map(|&phi| EventSampler::new(config.kind, phi, &config.epsilon_menu, config.chi))
        .collect::<Result<Vec<_>>>()?;
    let n = config.events_per_point;
    let per_point: Vec<Vec<Event>> = samplers
        .par_iter()
        .enumerate()
        .map(|(k, sampler)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            (0..n).map(|j| sampler.sample(&mut rng, k as u64 * n + j)).collect()
        })
        .collect();
    Ok(EventLog {
        config: config.clone(),
        events: per_point.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            phi: super::super::PhiSweep { start: 0.0, stop: PI, steps: 3 },
            events_per_point: 500,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn conditional_probabilities() {
        // χ = 0: the i branch is the i1 branch, P(s|i) = 2 · (1−ε²)/2
        let sampler = EventSampler::new(ExperimentKind::Owzm, 0.8, &[0.6], 0.0).unwrap();
        assert!((sampler.bob_marginal() - 0.5).abs() < 1e-12);
        assert!((sampler.conditional_s(0, IdlerOutcome::I) - 0.64).abs() < 1e-12);
        assert!((sampler.conditional_s(0, IdlerOutcome::IPrime) - 0.36).abs() < 1e-12);

        // balanced eraser: P(s|i) = (1 − V sin(φ + π/2))/2, zero at φ = 0 for V = 1
        let sampler = EventSampler::new(ExperimentKind::DelayedChoice, 0.0, &[FRAC_1_SQRT_2], FRAC_1_SQRT_2).unwrap();
        assert!(sampler.conditional_s(0, IdlerOutcome::I).abs() < 1e-12);
        assert!((sampler.conditional_s(0, IdlerOutcome::IPrime) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zwm_bob_always_clicks_i() {
        let sampler = EventSampler::new(ExperimentKind::Zwm, FRAC_PI_2, &[0.6], 0.3).unwrap();
        assert!((sampler.bob_marginal() - 1.0).abs() < 1e-12);
        assert!((sampler.conditional_s(0, IdlerOutcome::I) - 0.02).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seq in 0..200 {
            assert_eq!(sampler.sample(&mut rng, seq).bob, IdlerOutcome::I);
        }
    }

    #[test]
    fn sampler_rejects_empty_menu() {
        assert!(EventSampler::new(ExperimentKind::DelayedChoice, 0.0, &[], 0.5).is_err());
        assert!(EventSampler::new(ExperimentKind::DelayedChoice, 0.0, &[1.5], 0.5).is_err());
    }

    #[test]
    fn sample_event_draws_from_menu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let menu = [0.2, 0.9];
        for _ in 0..50 {
            let e = sample_event(&mut rng, 1.0, &menu, 0.4).unwrap();
            assert!(menu.contains(&e.epsilon));
            assert!(e.logical_time(ProtocolStep::BobDetects) < e.logical_time(ProtocolStep::TriggerSent));
            assert!(e.logical_time(ProtocolStep::TriggerSent) < e.logical_time(ProtocolStep::EpsilonChosen));
            assert!(e.logical_time(ProtocolStep::EpsilonChosen) < e.logical_time(ProtocolStep::AliceDetects));
        }
    }

    #[test]
    fn runs_are_deterministic_and_ordered() {
        let config = small_config();
        let a = run_delayed_choice(&config).unwrap();
        let b = run_delayed_choice(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.events.len(), 4 * 500);
        assert!(a.events.windows(2).all(|w| w[0].seq + 1 == w[1].seq));
        let mut other = config.clone();
        other.seed += 1;
        assert_ne!(run_delayed_choice(&other).unwrap().events, a.events);
    }

    #[test]
    fn thread_count_does_not_change_the_log() {
        let config = small_config();
        let parallel = run_delayed_choice(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_delayed_choice(&config)).unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn log_text_round_trip() {
        let log = run_delayed_choice(&small_config()).unwrap();
        let bytes = log.to_bytes(&log.config.describe());
        let back = EventLog::read_from(&bytes[..]).unwrap();
        assert_eq!(back, log);
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().nth(1), Some("seq,phi,bob,eps,alice"));
        assert!(EventLog::read_from(&b"seq,phi\n"[..]).is_err());
    }
}
