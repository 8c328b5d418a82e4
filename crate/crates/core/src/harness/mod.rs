//! Random scenario generation, metrics and parameter sweeps.

pub mod experiment;
pub mod gen;
pub mod metrics;

pub use experiment::{
    run_algorithm, run_experiment, sample_seed, single_transmission_tradeoff, ExperimentConfig, ExperimentKind,
    GridPoint, MissRatioRow, ResultsTable, Skipped, TradeoffMetric, TradeoffRow, PRESETS,
};
pub use gen::{generate_scenario, GenConfig, DEFAULT_PACKET_SIZE};
pub use metrics::{deadline_miss_ratio, mean_std, spearman};
