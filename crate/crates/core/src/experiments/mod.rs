//! The entangled (OWZM) and separable (ZWM) two-crystal setups, and the
//! delayed-choice protocol run as a seeded Monte Carlo event stream.

mod builders;
mod config;
mod montecarlo;
mod stats;

pub use builders::{
    build_owzm, build_owzm_which_path, build_single, build_zwm, entangled_source, outcome_distribution,
    separable_source, single_source, OutcomeDistribution,
};
pub use config::{ExperimentConfig, ExperimentKind, PhiSweep, DEFAULT_EPSILON_MENU};
pub use montecarlo::{
    run_delayed_choice, sample_event, Event, EventLog, EventSampler, IdlerOutcome, ProtocolStep, SignalOutcome,
};
pub use stats::{analyze, Counts, Estimate, ExpectedRatios, RunStatistics, Stratum};
