//! Command-line front end.
//!
//! Settings resolve as defaults, then the `--config` file (flat
//! `key=value` lines, `#` comments, keys named like the flags), then flags.
//! Every output file starts with a `# pairsim <version> ...` line echoing
//! the effective settings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiments::{analyze, run_delayed_choice, ExperimentConfig, ExperimentKind};
use crate::sweep::{owzm_sweep, single_sweep, write_csv, zwm_sweep, Grid};
use crate::verify::run_all;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "pairsim", version, about = "Two-crystal photon-pair interferometry simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single photon through a variable beam splitter: P_s, P_s' and their ratio versus phi
    Single(Flags),
    /// Entangled pair with Bob's eraser splitter: flat singles and coincidence fringes
    Owzm(Flags),
    /// Separable pair: the single-photon fringe survives in the singles
    Zwm(Flags),
    /// Monte Carlo run of the delayed-choice protocol; writes the event log and statistics
    DelayedChoice(Flags),
    /// Compare amplitude propagation against the closed forms on the full grid
    Verify(Flags),
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Alice's beam-splitter transmissivity
    #[arg(long, conflicts_with = "epsilon_menu")]
    pub epsilon: Option<f64>,
    /// Bob's beam-splitter transmissivity
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_stop: Option<f64>,
    /// Number of phase intervals (points = steps + 1)
    #[arg(long)]
    pub phi_steps: Option<usize>,
    /// Comma-separated epsilon values (QRNG menu for delayed-choice)
    #[arg(long)]
    pub epsilon_menu: Option<String>,
    /// Events per phase point
    #[arg(long)]
    pub events: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Experiment simulated by delayed-choice runs: owzm, zwm or delayed-choice
    #[arg(long)]
    pub kind: Option<String>,
    /// Output file; for delayed-choice a prefix for <out>.events.txt and <out>.stats.csv
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value settings file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Effective settings after merging file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: ExperimentConfig,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn header(&self, command: &str) -> String {
        let mut line = format!("pairsim {VERSION} command={command} {}", self.experiment.describe());
        if let Some(out) = &self.out {
            line.push_str(&format!(" out={}", out.display()));
        }
        line
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ParameterOutOfRange { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses a flat `key=value` settings text into `settings`.
pub fn apply_config_text(text: &str, settings: &mut Settings) -> Result<(), Error> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "out" {
            settings.out = Some(PathBuf::from(value));
        } else {
            settings
                .experiment
                .set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
    }
    Ok(())
}

pub fn resolve(flags: &Flags, default_kind: ExperimentKind) -> Result<Settings, Error> {
    let mut settings = Settings {
        experiment: ExperimentConfig {
            kind: default_kind,
            ..ExperimentConfig::default()
        },
        out: None,
    };
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        apply_config_text(&text, &mut settings)?;
    }
    let cfg = &mut settings.experiment;
    if let Some(k) = &flags.kind {
        cfg.kind = k.parse()?;
    }
    if let Some(e) = flags.epsilon {
        cfg.epsilon_menu = vec![e];
    }
    if let Some(menu) = &flags.epsilon_menu {
        cfg.set("epsilon-menu", menu)?;
    }
    if let Some(c) = flags.chi {
        cfg.chi = c;
    }
    if let Some(p) = flags.phi_start {
        cfg.phi.start = p;
    }
    if let Some(p) = flags.phi_stop {
        cfg.phi.stop = p;
    }
    if let Some(s) = flags.phi_steps {
        cfg.phi.steps = s;
    }
    if let Some(n) = flags.events {
        cfg.events_per_point = n;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(out) = &flags.out {
        settings.out = Some(out.clone());
    }
    Ok(settings)
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn run_sweep(command: &str, flags: &Flags) -> Result<(), Failure> {
    let settings = resolve(flags, ExperimentKind::Owzm)?;
    let cfg = &settings.experiment;
    for &eps in &cfg.epsilon_menu {
        crate::closed_form::visibility(eps)?;
    }
    let phis = cfg.phi_points();
    let rows = match command {
        "single" => single_sweep(&cfg.epsilon_menu, &phis)?,
        "owzm" => owzm_sweep(&cfg.epsilon_menu, &[cfg.chi], &phis)?,
        "zwm" => zwm_sweep(&cfg.epsilon_menu, &phis)?,
        other => unreachable!("not a sweep command: {other}"),
    };
    let mut out = open_output(settings.out.as_deref())?;
    write_csv(&rows, &mut out, &settings.header(command))?;
    out.flush()?;
    Ok(())
}

fn run_monte_carlo(flags: &Flags) -> Result<(), Failure> {
    let settings = resolve(flags, ExperimentKind::DelayedChoice)?;
    let header = settings.header("delayed-choice");
    let log = run_delayed_choice(&settings.experiment)?;
    let stats = analyze(&log)?;
    match &settings.out {
        Some(prefix) => {
            let mut events = open_output(Some(&with_suffix(prefix, ".events.txt")))?;
            log.write_to(&mut events, &header)?;
            events.flush()?;
            let mut table = open_output(Some(&with_suffix(prefix, ".stats.csv")))?;
            stats.write_csv(&mut table, &header)?;
            table.flush()?;
        }
        None => {
            let mut out = open_output(None)?;
            stats.write_csv(&mut out, &header)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run_verify(flags: &Flags) -> Result<(), Failure> {
    let settings = resolve(flags, ExperimentKind::Owzm)?;
    let grid = Grid::default();
    let results = run_all(&grid)?;
    let mut out = open_output(settings.out.as_deref())?;
    writeln!(
        out,
        "# pairsim {VERSION} command=verify grid=eps:{}x chi:{}x phi:{}",
        grid.epsilons.len(),
        grid.chis.len(),
        grid.phis.len()
    )?;
    for r in &results {
        writeln!(out, "{r}")?;
    }
    let worst = results
        .iter()
        .filter(|r| r.tolerance <= crate::verify::ORACLE)
        .map(|r| r.max_deviation)
        .fold(0.0, f64::max);
    writeln!(out, "max deviation over all checks: {worst:.3e}")?;
    out.flush()?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Single(f) => run_sweep("single", f),
        Command::Owzm(f) => run_sweep("owzm", f),
        Command::Zwm(f) => run_sweep("zwm", f),
        Command::DelayedChoice(f) => run_monte_carlo(f),
        Command::Verify(f) => run_verify(f),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("pairsim: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("pairsim: {msg}");
            EXIT_RUNTIME
        }
        Err(Failure::Check(msg)) => {
            eprintln!("pairsim: {msg}");
            EXIT_CHECK_FAILED
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_text() {
        let mut settings = Settings {
            experiment: ExperimentConfig::default(),
            out: None,
        };
        apply_config_text(
            "# comment\nchi = 0.25\nepsilon-menu=0.1,0.9  # trailing\n\nseed=7\nout=/tmp/x\n",
            &mut settings,
        )
        .unwrap();
        assert_eq!(settings.experiment.chi, 0.25);
        assert_eq!(settings.experiment.epsilon_menu, vec![0.1, 0.9]);
        assert_eq!(settings.experiment.seed, 7);
        assert_eq!(settings.out, Some(PathBuf::from("/tmp/x")));
        assert!(apply_config_text("chi 0.3", &mut settings).is_err());
        assert!(apply_config_text("colour=red", &mut settings).is_err());
    }

    #[test]
    fn resolve_defaults_and_flags() {
        let flags = Flags {
            epsilon: Some(0.6),
            seed: Some(9),
            phi_steps: Some(4),
            ..Flags::default()
        };
        let s = resolve(&flags, ExperimentKind::Owzm).unwrap();
        assert_eq!(s.experiment.epsilon_menu, vec![0.6]);
        assert_eq!(s.experiment.seed, 9);
        assert_eq!(s.experiment.phi_points().len(), 5);
        assert!(s.header("owzm").starts_with("pairsim "));
        assert!(s.header("owzm").contains("seed=9"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["pairsim", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["pairsim", "single", "--epsilon", "abc"]), EXIT_USAGE);
        assert_eq!(run(["pairsim", "single", "--epsilon", "1.5", "--out", "/dev/null"]), EXIT_USAGE);
        assert_eq!(
            run(["pairsim", "single", "--epsilon", "0.5", "--epsilon-menu", "0.1,0.2"]),
            EXIT_USAGE
        );
    }
}
