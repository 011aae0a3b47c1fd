use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optics::check_unit_interval;

/// QRNG menu used when none is given.
pub const DEFAULT_EPSILON_MENU: [f64; 3] = [0.3, FRAC_1_SQRT_2, 0.95];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Owzm,
    Zwm,
    DelayedChoice,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Owzm => "owzm",
            ExperimentKind::Zwm => "zwm",
            ExperimentKind::DelayedChoice => "delayed-choice",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "owzm" => Ok(ExperimentKind::Owzm),
            "zwm" => Ok(ExperimentKind::Zwm),
            "delayed-choice" | "delayed_choice" => Ok(ExperimentKind::DelayedChoice),
            other => Err(Error::Config(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// `steps + 1` equally spaced phases from `start` to `stop` inclusive
/// (a single point when `steps == 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiSweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Default for PhiSweep {
    fn default() -> Self {
        PhiSweep {
            start: 0.0,
            stop: TAU,
            steps: 72,
        }
    }
}

impl PhiSweep {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 0 {
            return vec![self.start];
        }
        let width = self.stop - self.start;
        (0..=self.steps)
            .map(|k| self.start + width * k as f64 / self.steps as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("phi range must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub phi: PhiSweep,
    /// A single entry for `owzm`/`zwm`; the QRNG menu for `delayed-choice`.
    pub epsilon_menu: Vec<f64>,
    pub chi: f64,
    pub events_per_point: u64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::DelayedChoice,
            phi: PhiSweep::default(),
            epsilon_menu: DEFAULT_EPSILON_MENU.to_vec(),
            chi: FRAC_1_SQRT_2,
            events_per_point: 10_000,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.phi.validate()?;
        check_unit_interval("chi", self.chi)?;
        for &eps in &self.epsilon_menu {
            check_unit_interval("epsilon", eps)?;
        }
        match self.kind {
            ExperimentKind::Owzm | ExperimentKind::Zwm if self.epsilon_menu.len() != 1 => {
                return Err(Error::Config(format!(
                    "{} takes exactly one epsilon, got {}",
                    self.kind,
                    self.epsilon_menu.len()
                )));
            }
            ExperimentKind::DelayedChoice => {
                let mut distinct = self.epsilon_menu.clone();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                if distinct.len() < 2 {
                    return Err(Error::Config(
                        "delayed-choice needs an epsilon menu with at least two distinct entries".into(),
                    ));
                }
            }
            _ => {}
        }
        if self.events_per_point == 0 {
            return Err(Error::Config("events per phi point must be at least 1".into()));
        }
        Ok(())
    }

    pub fn phi_points(&self) -> Vec<f64> {
        self.phi.points()
    }

    /// Sets one `key=value` setting; keys mirror the command-line flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value {value:?} for {key}: {what}"));
        let real = || value.trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
        match key {
            "kind" => self.kind = value.trim().parse()?,
            "epsilon" => self.epsilon_menu = vec![real()?],
            "epsilon-menu" => {
                self.epsilon_menu = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
                    .collect::<Result<_>>()?
            }
            "chi" => self.chi = real()?,
            "phi-start" => self.phi.start = real()?,
            "phi-stop" => self.phi.stop = real()?,
            "phi-steps" => self.phi.steps = value.trim().parse().map_err(|e| bad(&format!("{e}")))?,
            "events" => self.events_per_point = value.trim().parse().map_err(|e| bad(&format!("{e}")))?,
            "seed" => self.seed = value.trim().parse().map_err(|e| bad(&format!("{e}")))?,
            other => return Err(Error::Config(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Settings as `(key, value)` pairs, floats in round-trip precision.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let menu: Vec<String> = self.epsilon_menu.iter().map(|e| format!("{e:?}")).collect();
        vec![
            ("kind", self.kind.to_string()),
            ("epsilon-menu", menu.join(",")),
            ("chi", format!("{:?}", self.chi)),
            ("phi-start", format!("{:?}", self.phi.start)),
            ("phi-stop", format!("{:?}", self.phi.stop)),
            ("phi-steps", self.phi.steps.to_string()),
            ("events", self.events_per_point.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Space-separated `key=value` rendering, parsed back by
    /// [`ExperimentConfig::from_description`].
    pub fn describe(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Tokens without `=` and keys that are not experiment settings (tool
    /// version, output paths) are skipped.
    pub fn from_description(text: &str) -> Result<Self> {
        let known: Vec<&str> = Self::default().to_pairs().into_iter().map(|(k, _)| k).collect();
        let mut config = ExperimentConfig::default();
        for token in text.split_whitespace() {
            match token.split_once('=') {
                Some((k, v)) if known.contains(&k) || k == "epsilon" => config.set(k, v)?,
                _ => {}
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points() {
        let pts = PhiSweep::default().points();
        assert_eq!(pts.len(), 73);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[72], TAU);
        assert!((pts[18] - TAU / 4.0).abs() < 1e-15);
        let single = PhiSweep { start: 1.0, stop: 5.0, steps: 0 };
        assert_eq!(single.points(), vec![1.0]);
    }

    #[test]
    fn kind_validation() {
        let mut c = ExperimentConfig::default();
        c.validate().unwrap();
        c.epsilon_menu = vec![0.5, 0.5];
        assert!(c.validate().is_err());
        c.kind = ExperimentKind::Owzm;
        assert!(c.validate().is_err());
        c.epsilon_menu = vec![0.5];
        c.validate().unwrap();
        c.chi = 1.2;
        assert!(c.validate().is_err());
        c.chi = 0.5;
        c.events_per_point = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn description_round_trip() {
        let mut c = ExperimentConfig::default();
        c.set("epsilon-menu", "0.1, 0.2,0.7071067811865476").unwrap();
        c.set("phi-stop", "3.5").unwrap();
        c.set("seed", "18446744073709551615").unwrap();
        let back = ExperimentConfig::from_description(&c.describe()).unwrap();
        assert_eq!(back, c);
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("chi", "abc").is_err());
        assert!(c.set("kind", "mzi").is_err());
    }
}
