//! Counting and ratio estimation over an [`EventLog`].

use std::collections::HashMap;
use std::io::Write;

use super::config::ExperimentKind;
use super::montecarlo::{EventLog, IdlerOutcome, SignalOutcome};
use crate::closed_form::{eraser_coincidence_probs, single_probs, CoincidenceProbs, FringeParams, Ratio};
use crate::error::{Error, Result};
use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub n: u64,
    pub n_si: u64,
    pub n_spi: u64,
    pub n_sip: u64,
    pub n_spip: u64,
}

impl Counts {
    pub fn n_s(&self) -> u64 {
        self.n_si + self.n_sip
    }

    pub fn n_sp(&self) -> u64 {
        self.n_spi + self.n_spip
    }

    pub fn n_i(&self) -> u64 {
        self.n_si + self.n_spi
    }

    fn add(&mut self, bob: IdlerOutcome, alice: SignalOutcome) {
        self.n += 1;
        let slot = match (alice, bob) {
            (SignalOutcome::S, IdlerOutcome::I) => &mut self.n_si,
            (SignalOutcome::SPrime, IdlerOutcome::I) => &mut self.n_spi,
            (SignalOutcome::S, IdlerOutcome::IPrime) => &mut self.n_sip,
            (SignalOutcome::SPrime, IdlerOutcome::IPrime) => &mut self.n_spip,
        };
        *slot += 1;
    }
}

/// A rate or ratio with its binomial standard error, or the reason none
/// could be formed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimate {
    Value { value: f64, stderr: f64 },
    Empty,
    ZeroDenominator,
}

impl Estimate {
    /// `a/b` with the delta-method error `sqrt(p / (m (1−p)³))`, `m = a + b`,
    /// `p = a/m`, which equals `(a/b)·sqrt(1/a + 1/b)` when `a > 0`.
    pub fn ratio(a: u64, b: u64) -> Self {
        let m = a + b;
        if m == 0 {
            return Estimate::Empty;
        }
        if b == 0 {
            return Estimate::ZeroDenominator;
        }
        let p = a as f64 / m as f64;
        Estimate::Value {
            value: a as f64 / b as f64,
            stderr: (p / (m as f64 * (1.0 - p).powi(3))).sqrt(),
        }
    }

    /// `k/n` with `sqrt(p(1−p)/n)`.
    pub fn rate(k: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate::Empty;
        }
        let p = k as f64 / n as f64;
        Estimate::Value {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Estimate::Value { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn stderr(&self) -> Option<f64> {
        match self {
            Estimate::Value { stderr, .. } => Some(*stderr),
            _ => None,
        }
    }

    /// Whether `expected` lies within `k` standard errors. A zero count
    /// denominator agrees only with an unbounded expectation.
    pub fn agrees_with(&self, expected: &Ratio, k: f64) -> Option<bool> {
        match (self, expected) {
            (Estimate::Empty, _) => None,
            (Estimate::ZeroDenominator, r) => Some(r.is_unbounded()),
            (Estimate::Value { .. }, Ratio::Unbounded { .. }) => Some(false),
            (Estimate::Value { value, stderr }, Ratio::Finite(want)) => Some((value - want).abs() <= k * stderr),
        }
    }
}

/// Closed-form ratios for a stratum, from joint probabilities averaged
/// over the stratum's `ε` values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedRatios {
    pub probs: CoincidenceProbs,
}

impl ExpectedRatios {
    pub fn singles(&self) -> Ratio {
        let p = &self.probs;
        Ratio::from_probs(p.s_i + p.s_ip, p.sp_i + p.sp_ip)
    }

    pub fn coinc_i(&self) -> Ratio {
        Ratio::from_probs(self.probs.s_i, self.probs.sp_i)
    }

    pub fn coinc_ip(&self) -> Ratio {
        Ratio::from_probs(self.probs.s_ip, self.probs.sp_ip)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    pub phi: f64,
    /// `None` for rows pooled over the whole menu.
    pub epsilon: Option<f64>,
    pub counts: Counts,
    pub expected: ExpectedRatios,
}

impl Stratum {
    /// `N_s / N_s'`, ignoring Bob.
    pub fn singles_ratio(&self) -> Estimate {
        Estimate::ratio(self.counts.n_s(), self.counts.n_sp())
    }

    /// `N_{s,i} / N_{s',i}`.
    pub fn coinc_ratio_i(&self) -> Estimate {
        Estimate::ratio(self.counts.n_si, self.counts.n_spi)
    }

    /// `N_{s,i'} / N_{s',i'}`.
    pub fn coinc_ratio_ip(&self) -> Estimate {
        Estimate::ratio(self.counts.n_sip, self.counts.n_spip)
    }

    /// `N_s / N`.
    pub fn alice_rate(&self) -> Estimate {
        Estimate::rate(self.counts.n_s(), self.counts.n)
    }

    /// `N_i / N`.
    pub fn bob_rate(&self) -> Estimate {
        Estimate::rate(self.counts.n_i(), self.counts.n)
    }

    pub fn flags(&self) -> Vec<&'static str> {
        let mut flags = Vec::new();
        if self.counts.n == 0 {
            flags.push("empty");
            return flags;
        }
        for (name, est) in [
            ("singles", self.singles_ratio()),
            ("coinc-i", self.coinc_ratio_i()),
            ("coinc-ip", self.coinc_ratio_ip()),
        ] {
            match est {
                Estimate::Empty => flags.push(match name {
                    "coinc-i" => "no-i-events",
                    "coinc-ip" => "no-ip-events",
                    _ => "empty",
                }),
                Estimate::ZeroDenominator => flags.push(match name {
                    "singles" => "zero-den-singles",
                    "coinc-i" => "zero-den-coinc-i",
                    _ => "zero-den-coinc-ip",
                }),
                Estimate::Value { .. } => {}
            }
        }
        flags
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStatistics {
    pub config: ExperimentConfig,
    /// One row per `(φ, ε)`, in sweep order then ascending `ε`.
    pub strata: Vec<Stratum>,
    /// One row per `φ`, pooled over `ε`.
    pub pooled: Vec<Stratum>,
}

const STATS_COLUMNS: &str = "phi,eps,n,n_s,n_sp,n_si,n_spi,n_sip,n_spip,\
ratio_singles,stderr_singles,expected_singles,\
ratio_coinc_i,stderr_coinc_i,expected_coinc_i,\
ratio_coinc_ip,stderr_coinc_ip,expected_coinc_ip,flags";

fn fmt_estimate(e: Estimate) -> (String, String) {
    match e {
        Estimate::Value { value, stderr } => (format!("{value:?}"), format!("{stderr:?}")),
        _ => (String::new(), String::new()),
    }
}

impl RunStatistics {
    pub fn rows(&self) -> impl Iterator<Item = &Stratum> {
        self.strata.iter().chain(&self.pooled)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, header: &str) -> std::io::Result<()> {
        writeln!(out, "# {header}")?;
        writeln!(out, "{STATS_COLUMNS}")?;
        for row in self.rows() {
            let c = &row.counts;
            let eps = row.epsilon.map_or_else(|| "all".to_string(), |e| format!("{e:?}"));
            let (rs, ss) = fmt_estimate(row.singles_ratio());
            let (ri, si) = fmt_estimate(row.coinc_ratio_i());
            let (rip, sip) = fmt_estimate(row.coinc_ratio_ip());
            writeln!(
                out,
                "{:?},{eps},{},{},{},{},{},{},{},{rs},{ss},{},{ri},{si},{},{rip},{sip},{},{}",
                row.phi,
                c.n,
                c.n_s(),
                c.n_sp(),
                c.n_si,
                c.n_spi,
                c.n_sip,
                c.n_spip,
                row.expected.singles(),
                row.expected.coinc_i(),
                row.expected.coinc_ip(),
                row.flags().join(";"),
            )?;
        }
        Ok(())
    }
}

fn expected_probs(config: &ExperimentConfig, epsilon: f64, phi: f64) -> Result<CoincidenceProbs> {
    match config.kind {
        ExperimentKind::Zwm => {
            let (ps, psp) = single_probs(epsilon, phi)?;
            Ok(CoincidenceProbs { s_i: ps, sp_i: psp, s_ip: 0.0, sp_ip: 0.0 })
        }
        ExperimentKind::Owzm | ExperimentKind::DelayedChoice => {
            eraser_coincidence_probs(&FringeParams::new(epsilon, config.chi, phi)?)
        }
    }
}

fn averaged(probs: &[CoincidenceProbs]) -> CoincidenceProbs {
    let k = probs.len() as f64;
    let sum = |f: fn(&CoincidenceProbs) -> f64| probs.iter().map(f).sum::<f64>() / k;
    CoincidenceProbs {
        s_i: sum(|p| p.s_i),
        sp_i: sum(|p| p.sp_i),
        s_ip: sum(|p| p.s_ip),
        sp_ip: sum(|p| p.sp_ip),
    }
}

/// Counts every `(φ, ε)` stratum of the configured sweep and menu; strata
/// that received no events are kept and flagged `empty`.
pub fn analyze(log: &EventLog) -> Result<RunStatistics> {
    if log.events.is_empty() {
        return Err(Error::Config("cannot analyze an empty event log".into()));
    }
    let config = &log.config;
    let phis = config.phi_points();
    let mut menu = config.epsilon_menu.clone();
    menu.sort_by(f64::total_cmp);
    menu.dedup();

    let phi_index: HashMap<u64, usize> = phis.iter().enumerate().map(|(k, p)| (p.to_bits(), k)).collect();
    let eps_index: HashMap<u64, usize> = menu.iter().enumerate().map(|(k, e)| (e.to_bits(), k)).collect();
    let mut counts = vec![vec![Counts::default(); menu.len()]; phis.len()];
    for event in &log.events {
        let p = *phi_index
            .get(&event.phi.to_bits())
            .ok_or_else(|| Error::Parse(format!("event {} has phi {} off the sweep grid", event.seq, event.phi)))?;
        let e = *eps_index
            .get(&event.epsilon.to_bits())
            .ok_or_else(|| Error::Parse(format!("event {} has epsilon {} outside the menu", event.seq, event.epsilon)))?;
        counts[p][e].add(event.bob, event.alice);
    }

    let mut strata = Vec::with_capacity(phis.len() * menu.len());
    let mut pooled = Vec::with_capacity(phis.len());
    for (p, &phi) in phis.iter().enumerate() {
        let mut probs = Vec::with_capacity(menu.len());
        let mut total = Counts::default();
        for (e, &eps) in menu.iter().enumerate() {
            let c = counts[p][e];
            let expected = expected_probs(config, eps, phi)?;
            probs.push(expected);
            total.n += c.n;
            total.n_si += c.n_si;
            total.n_spi += c.n_spi;
            total.n_sip += c.n_sip;
            total.n_spip += c.n_spip;
            strata.push(Stratum {
                phi,
                epsilon: Some(eps),
                counts: c,
                expected: ExpectedRatios { probs: expected },
            });
        }
        pooled.push(Stratum {
            phi,
            epsilon: None,
            counts: total,
            expected: ExpectedRatios { probs: averaged(&probs) },
        });
    }
    Ok(RunStatistics {
        config: config.clone(),
        strata,
        pooled,
    })
}
