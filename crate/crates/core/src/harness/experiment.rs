//! Parameter sweeps over random scenarios.
//!
//! Sample `s` of every grid point uses the same derived scenario seed, so
//! neighbouring grid points are compared on common random numbers. Samples
//! run in parallel but are aggregated in sample-index order, which keeps the
//! output bit-identical for a given master seed.

use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gen::{generate_scenario, GenConfig};
use super::metrics::{deadline_miss_ratio, mean_std};
use crate::baselines::{run_dsf, run_sin1};
use crate::clique::max_weight_clique;
use crate::error::{Result, RsncError};
use crate::graph::{build_graph, CodingGraph};
use crate::model::{fits, Algorithm, Scenario, TransmissionLog, EPS};
use crate::oracle::{optimal_schedule, OracleLimits};
use crate::scheduler::{doomed_vertices, run_rsnc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Deadline miss ratio of whole transmission processes.
    MissRatio,
    /// Satisfied and doomed request counts of one broadcast at fixed rates.
    SingleTxTradeoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub label: String,
    pub config: GenConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub grid: Vec<GridPoint>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Broadcast rates probed by the single-transmission experiment.
    #[serde(default)]
    pub candidate_rates: Vec<f64>,
    #[serde(default = "default_oracle_vertices")]
    pub oracle_max_vertices: usize,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Rsnc, Algorithm::Dsf, Algorithm::Sin1]
}

fn default_samples() -> usize {
    100
}

fn default_oracle_vertices() -> usize {
    OracleLimits::default().max_vertices
}

pub const PRESETS: [&str; 4] = ["single-tx-tradeoff", "rate-sweep", "m-sweep", "n-sweep"];

impl ExperimentConfig {
    fn with_grid(name: &str, kind: ExperimentKind, grid: Vec<GridPoint>) -> Self {
        ExperimentConfig {
            name: name.into(),
            kind,
            grid,
            algorithms: default_algorithms(),
            samples: default_samples(),
            seed: 0,
            candidate_rates: Vec::new(),
            oracle_max_vertices: default_oracle_vertices(),
        }
    }

    /// Built-in sweeps: "single-tx-tradeoff", "rate-sweep", "m-sweep", "n-sweep".
    pub fn preset(name: &str) -> Option<Self> {
        let point = |label: String, config: GenConfig| GridPoint { label, config };
        let config = match name {
            "single-tx-tradeoff" => {
                let base = GenConfig::new(10, 20, (10.0, 100.0), (10.0, 50.0));
                let mut cfg = Self::with_grid(
                    name,
                    ExperimentKind::SingleTxTradeoff,
                    vec![point("n=10 m=20 r=10-100 T=10-50".into(), base)],
                );
                cfg.candidate_rates = (1..=10).map(|k| 10.0 * k as f64).collect();
                cfg
            }
            "rate-sweep" => {
                let grid = [(10.0, 50.0), (10.0, 100.0), (50.0, 100.0)]
                    .into_iter()
                    .map(|(lo, hi)| point(format!("r={lo}-{hi}"), GenConfig::new(10, 10, (lo, hi), (10.0, 50.0))))
                    .collect();
                Self::with_grid(name, ExperimentKind::MissRatio, grid)
            }
            "m-sweep" => {
                let mut grid = Vec::new();
                for (lo, hi) in [(10.0, 50.0), (50.0, 100.0)] {
                    for m in 5..=15 {
                        grid.push(point(format!("r={lo}-{hi} m={m}"), GenConfig::new(10, m, (lo, hi), (10.0, 50.0))));
                    }
                }
                Self::with_grid(name, ExperimentKind::MissRatio, grid)
            }
            "n-sweep" => {
                let mut grid = Vec::new();
                for tmax in [50.0, 80.0] {
                    for n in (10..=40).step_by(5) {
                        grid.push(point(
                            format!("T=10-{tmax} n={n}"),
                            GenConfig::new(n, 10, (10.0, 50.0), (10.0, tmax)),
                        ));
                    }
                }
                Self::with_grid(name, ExperimentKind::MissRatio, grid)
            }
            _ => return None,
        };
        Some(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(RsncError::InvalidConfig("samples must be positive".into()));
        }
        if self.grid.is_empty() {
            return Err(RsncError::InvalidConfig("empty grid".into()));
        }
        for p in &self.grid {
            p.config.validate()?;
        }
        match self.kind {
            ExperimentKind::MissRatio if self.algorithms.is_empty() => {
                Err(RsncError::InvalidConfig("no algorithms selected".into()))
            }
            ExperimentKind::SingleTxTradeoff if self.candidate_rates.iter().any(|r| !(*r > 0.0)) => {
                Err(RsncError::InvalidConfig("candidate rates must be positive".into()))
            }
            ExperimentKind::SingleTxTradeoff if self.candidate_rates.is_empty() => {
                Err(RsncError::InvalidConfig("no candidate rates".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Scenario seed of sample `index` under `master`.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissRatioRow {
    pub grid_point: String,
    pub algorithm: Algorithm,
    pub samples: usize,
    pub mean_miss_ratio: f64,
    pub std_miss_ratio: f64,
    pub mean_transmissions: f64,
    /// Present only when timing was requested.
    pub mean_runtime_us: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TradeoffMetric {
    Satisfied,
    Failed,
}

impl TradeoffMetric {
    pub fn name(self) -> &'static str {
        match self {
            TradeoffMetric::Satisfied => "satisfied",
            TradeoffMetric::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffRow {
    pub grid_point: String,
    pub rate: f64,
    pub metric: TradeoffMetric,
    pub samples: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    pub grid_point: String,
    pub algorithm: Algorithm,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub rows: Vec<MissRatioRow>,
    pub tradeoff: Vec<TradeoffRow>,
    /// Oracle samples refused for exceeding the vertex limit.
    pub skipped: Vec<Skipped>,
}

impl ResultsTable {
    pub fn row(&self, grid_point: &str, algorithm: Algorithm) -> Option<&MissRatioRow> {
        self.rows.iter().find(|r| r.grid_point == grid_point && r.algorithm == algorithm)
    }

    pub fn tradeoff_series(&self, metric: TradeoffMetric) -> Vec<&TradeoffRow> {
        self.tradeoff.iter().filter(|r| r.metric == metric).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self.kind {
            ExperimentKind::MissRatio => {
                w.write_record([
                    "experiment",
                    "grid_point",
                    "algorithm",
                    "samples",
                    "mean_miss_ratio",
                    "std_miss_ratio",
                    "mean_transmissions",
                    "mean_runtime_us",
                ])?;
                for r in &self.rows {
                    w.write_record([
                        self.experiment.clone(),
                        r.grid_point.clone(),
                        r.algorithm.to_string(),
                        r.samples.to_string(),
                        r.mean_miss_ratio.to_string(),
                        r.std_miss_ratio.to_string(),
                        r.mean_transmissions.to_string(),
                        r.mean_runtime_us.map(|t| t.to_string()).unwrap_or_default(),
                    ])?;
                }
            }
            ExperimentKind::SingleTxTradeoff => {
                w.write_record(["experiment", "grid_point", "rate", "metric", "samples", "mean", "std"])?;
                for r in &self.tradeoff {
                    w.write_record([
                        self.experiment.clone(),
                        r.grid_point.clone(),
                        r.rate.to_string(),
                        r.metric.name().to_string(),
                        r.samples.to_string(),
                        r.mean.to_string(),
                        r.std.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_algorithm(algorithm: Algorithm, scenario: &Scenario, limits: OracleLimits) -> Result<TransmissionLog> {
    match algorithm {
        Algorithm::Rsnc => run_rsnc(scenario),
        Algorithm::Dsf => run_dsf(scenario),
        Algorithm::Sin1 => run_sin1(scenario),
        Algorithm::Oracle => optimal_schedule(scenario, limits).map(|r| r.best_log),
    }
}

struct AlgoSample {
    miss_ratio: f64,
    transmissions: usize,
    runtime_us: f64,
}

fn miss_ratio_sample(
    scenario: &Scenario,
    algorithms: &[Algorithm],
    limits: OracleLimits,
) -> Result<Vec<Option<AlgoSample>>> {
    algorithms
        .iter()
        .map(|&a| {
            let start = Instant::now();
            let log = match run_algorithm(a, scenario, limits) {
                Ok(log) => log,
                Err(RsncError::OracleLimit { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let runtime_us = start.elapsed().as_secs_f64() * 1e6;
            Ok(Some(AlgoSample {
                miss_ratio: deadline_miss_ratio(&log, scenario)?,
                transmissions: log.transmissions.len(),
                runtime_us,
            }))
        })
        .collect()
}

/// Satisfied and doomed request counts when the first broadcast must use
/// exactly `rate`: the best clique among vertices reachable and on time at
/// that rate is sent, and the remaining vertices are checked for doom.
pub fn single_transmission_tradeoff(graph: &CodingGraph, rate: f64) -> (usize, usize) {
    let delay = graph.packet_size() / rate;
    let clique = max_weight_clique(graph, |_, s| s.max_rate >= rate - EPS && fits(delay, s.deadline));
    let failed = doomed_vertices(graph, delay, &clique.members).len();
    (clique.members.len(), failed)
}

fn tradeoff_sample(scenario: &Scenario, rates: &[f64]) -> Result<Vec<(usize, usize)>> {
    let graph = build_graph(scenario)?;
    Ok(rates.iter().map(|&r| single_transmission_tradeoff(&graph, r)).collect())
}

pub fn run_experiment(experiment: &ExperimentConfig, timing: bool) -> Result<ResultsTable> {
    experiment.validate()?;
    let limits = OracleLimits { max_vertices: experiment.oracle_max_vertices, max_transmissions: None };
    let seeds: Vec<u64> = (0..experiment.samples).map(|s| sample_seed(experiment.seed, s)).collect();
    let mut table = ResultsTable {
        experiment: experiment.name.clone(),
        kind: experiment.kind,
        rows: Vec::new(),
        tradeoff: Vec::new(),
        skipped: Vec::new(),
    };

    for point in &experiment.grid {
        let scenarios: Vec<Scenario> = seeds
            .iter()
            .map(|&seed| generate_scenario(&point.config.clone().with_seed(seed)))
            .collect::<Result<_>>()?;

        match experiment.kind {
            ExperimentKind::MissRatio => {
                let per_sample: Vec<Vec<Option<AlgoSample>>> = scenarios
                    .par_iter()
                    .map(|s| miss_ratio_sample(s, &experiment.algorithms, limits))
                    .collect::<Result<_>>()?;
                for (a_idx, &algorithm) in experiment.algorithms.iter().enumerate() {
                    let done: Vec<&AlgoSample> = per_sample.iter().filter_map(|v| v[a_idx].as_ref()).collect();
                    let skipped = per_sample.len() - done.len();
                    if skipped > 0 {
                        table.skipped.push(Skipped { grid_point: point.label.clone(), algorithm, count: skipped });
                    }
                    if done.is_empty() {
                        continue;
                    }
                    let ratios: Vec<f64> = done.iter().map(|s| s.miss_ratio).collect();
                    let txs: Vec<f64> = done.iter().map(|s| s.transmissions as f64).collect();
                    let times: Vec<f64> = done.iter().map(|s| s.runtime_us).collect();
                    let (mean, std) = mean_std(&ratios);
                    table.rows.push(MissRatioRow {
                        grid_point: point.label.clone(),
                        algorithm,
                        samples: done.len(),
                        mean_miss_ratio: mean,
                        std_miss_ratio: std,
                        mean_transmissions: mean_std(&txs).0,
                        mean_runtime_us: timing.then(|| mean_std(&times).0),
                    });
                }
            }
            ExperimentKind::SingleTxTradeoff => {
                let per_sample: Vec<Vec<(usize, usize)>> = scenarios
                    .par_iter()
                    .map(|s| tradeoff_sample(s, &experiment.candidate_rates))
                    .collect::<Result<_>>()?;
                for (r_idx, &rate) in experiment.candidate_rates.iter().enumerate() {
                    for metric in [TradeoffMetric::Satisfied, TradeoffMetric::Failed] {
                        let values: Vec<f64> = per_sample
                            .iter()
                            .map(|v| match metric {
                                TradeoffMetric::Satisfied => v[r_idx].0 as f64,
                                TradeoffMetric::Failed => v[r_idx].1 as f64,
                            })
                            .collect();
                        let (mean, std) = mean_std(&values);
                        table.tradeoff.push(TradeoffRow {
                            grid_point: point.label.clone(),
                            rate,
                            metric,
                            samples: values.len(),
                            mean,
                            std,
                        });
                    }
                }
            }
        }
    }
    Ok(table)
}
