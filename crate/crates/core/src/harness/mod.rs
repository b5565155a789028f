//! Monte Carlo driver: one paired trial per seed, swept over `(M, N)`.

mod config;
mod output;

pub use config::{OutputFormat, SweepConfig, UtilityChoice};
pub use output::{format_sig12, parse_csv, rows_to_csv, rows_to_json, write_results, ResultRow};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{detection_matrix, sample_observations, DetectionMatrix, ObservationMatrix};
use crate::matching::{is_stable, run_random_allocation, ProposalEvent, Proposer};
use crate::matrix::Matrix;
use crate::metrics::{random_allocation_rates, Algorithm, TrialMetrics};
use crate::preferences::{build_preferences_with, ListPolicy, ProposalOrder, ProposalTable};
use crate::scenario::{rate_matrix, sample_instance, NetworkInstance, ScenarioConfig};
use crate::{Error, Matching, Result};

/// Options that shape a trial beyond the physical scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub algorithms: Vec<Algorithm>,
    pub pu_utility: UtilityChoice,
    pub proposal_order: ProposalOrder,
    pub verify_stability: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            pu_utility: UtilityChoice::default(),
            proposal_order: ProposalOrder::default(),
            verify_stability: false,
        }
    }
}

/// Independent seeds for the three random stages of a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub geometry: u64,
    pub noise: u64,
    pub random_baseline: u64,
}

impl TrialSeeds {
    /// Depends only on `(base_seed, trial_index)`, so a trial is the same in
    /// every cell, at every thread count, and in every longer run.
    pub fn derive(base_seed: u64, trial_index: u64) -> Self {
        let root = splitmix64(base_seed ^ splitmix64(trial_index));
        Self { geometry: splitmix64(root ^ 1), noise: splitmix64(root ^ 2), random_baseline: splitmix64(root ^ 3) }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything one trial computed, for tracing.
#[derive(Clone, Debug)]
pub struct TrialDetail {
    pub seeds: TrialSeeds,
    pub instance: NetworkInstance<f64>,
    pub observations: ObservationMatrix<f64>,
    pub detection: DetectionMatrix<f64>,
    pub rates: Matrix<f64>,
    pub filtered: ProposalTable<f64>,
    pub full: ProposalTable<f64>,
    pub proposed: Option<(Matching, Vec<ProposalEvent>)>,
    pub deferred_acceptance: Option<(Matching, Vec<ProposalEvent>)>,
    pub random_choices: Option<Vec<usize>>,
    pub metrics: Vec<TrialMetrics<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub metrics: Vec<TrialMetrics<f64>>,
}

impl TrialRecord {
    pub fn get(&self, algorithm: Algorithm) -> Option<&TrialMetrics<f64>> {
        self.metrics.iter().find(|t| t.algorithm == algorithm)
    }
}

/// Runs every requested algorithm on the same instance and observations.
/// `cfg.rng_seed` is the base seed.
pub fn run_trial(cfg: &ScenarioConfig<f64>, opts: &TrialOptions, trial_index: u64) -> Result<TrialRecord> {
    let detail = trace_trial(cfg, opts, trial_index)?;
    Ok(TrialRecord { trial_index, metrics: detail.metrics })
}

pub fn trace_trial(cfg: &ScenarioConfig<f64>, opts: &TrialOptions, trial_index: u64) -> Result<TrialDetail> {
    cfg.validate()?;
    let seeds = TrialSeeds::derive(cfg.rng_seed, trial_index);
    let instance = sample_instance(cfg, seeds.geometry);
    let observations = sample_observations(cfg, &instance, seeds.noise);
    let detection = detection_matrix(cfg, &instance, &observations)?;
    let rates = rate_matrix(cfg, &instance);
    let alphas = cfg.alphas();
    let full = build_preferences_with(detection.matrix(), &rates, &alphas, opts.proposal_order, ListPolicy::Full);
    let filtered = full.truncated();
    let utility = opts.pu_utility.to_fn();
    let wants = |a: Algorithm| opts.algorithms.contains(&a);

    let traced = |table: &ProposalTable<f64>| {
        let mut events = Vec::new();
        let m = Proposer::new(table, &utility, &instance.pu_active).run_traced(|e| events.push(e));
        (m, events)
    };

    let mut metrics = Vec::new();
    let proposed = wants(Algorithm::Proposed).then(|| traced(&filtered));
    if let Some((matching, _)) = &proposed {
        if opts.verify_stability {
            let report = is_stable(matching, &filtered, &utility, &instance.pu_active)?;
            if !report.is_stable() {
                return Err(Error::Unstable { trial: trial_index, pairs: report.blocking_pairs });
            }
        }
        metrics.push(TrialMetrics::from_matching(Algorithm::Proposed, matching, &rates));
    }
    let deferred_acceptance = wants(Algorithm::DeferredAcceptance).then(|| traced(&full));
    if let Some((matching, _)) = &deferred_acceptance {
        metrics.push(TrialMetrics::from_matching(Algorithm::DeferredAcceptance, matching, &rates));
    }
    let random_choices = wants(Algorithm::Random).then(|| run_random_allocation(cfg, &instance, seeds.random_baseline));
    if let Some(choices) = &random_choices {
        let (sum_rate, min_rate) = random_allocation_rates(cfg, &instance, choices);
        metrics.push(TrialMetrics {
            algorithm: Algorithm::Random,
            sum_rate,
            min_rate,
            num_matched: choices.len(),
            proposal_count: 0,
            rounds: 0,
        });
    }

    Ok(TrialDetail {
        seeds,
        instance,
        observations,
        detection,
        rates,
        filtered,
        full,
        proposed,
        deferred_acceptance,
        random_choices,
        metrics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SumRate,
    MinRate,
    ProposalCount,
    Rounds,
    NumMatched,
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::SumRate, Metric::MinRate, Metric::ProposalCount, Metric::Rounds, Metric::NumMatched];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::SumRate => "sum_rate",
            Metric::MinRate => "min_rate",
            Metric::ProposalCount => "proposal_count",
            Metric::Rounds => "rounds",
            Metric::NumMatched => "num_matched",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }

    pub fn of(self, t: &TrialMetrics<f64>) -> f64 {
        match self {
            Metric::SumRate => t.sum_rate,
            Metric::MinRate => t.min_rate,
            Metric::ProposalCount => t.proposal_count as f64,
            Metric::Rounds => t.rounds as f64,
            Metric::NumMatched => t.num_matched as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Standard error of the mean; zero for a single trial.
    pub stderr: f64,
}

impl Stat {
    /// Mean and standard error, accumulated in the order given.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        Self { mean, stderr: (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt() }
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub m: usize,
    pub n: usize,
    pub algorithm: Algorithm,
    pub trials: u64,
    pub stats: Vec<(Metric, Stat)>,
}

impl CellSummary {
    pub fn stat(&self, metric: Metric) -> Stat {
        self.stats.iter().find(|(m, _)| *m == metric).map(|(_, s)| *s).expect("every metric is summarized")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
}

impl SweepSummary {
    pub fn cell(&self, m: usize, n: usize, algorithm: Algorithm) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.m == m && c.n == n && c.algorithm == algorithm)
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        self.cells
            .iter()
            .flat_map(|c| {
                c.stats.iter().map(move |(metric, stat)| ResultRow {
                    m: c.m,
                    n: c.n,
                    algorithm: c.algorithm.tag().to_string(),
                    metric: metric.tag().to_string(),
                    mean: stat.mean,
                    stderr: stat.stderr,
                    trials: c.trials,
                })
            })
            .collect()
    }
}

/// Runs every trial of one `(M, N)` cell, in parallel, returned in trial order.
pub fn run_cell(sweep: &SweepConfig, m: usize, n: usize) -> Result<Vec<TrialRecord>> {
    let cfg = sweep.scenario.clone().with_size(m, n);
    let opts = sweep.trial_options();
    let work = || -> Result<Vec<TrialRecord>> {
        (0..sweep.trials).into_par_iter().map(|t| run_trial(&cfg, &opts, t)).collect()
    };
    let records = match sweep.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    records.map_err(|e| Error::Cell { m, n, source: Box::new(e) })
}

pub fn summarize_cell(m: usize, n: usize, algorithms: &[Algorithm], records: &[TrialRecord]) -> Vec<CellSummary> {
    Algorithm::ALL
        .into_iter()
        .filter(|a| algorithms.contains(a))
        .map(|algorithm| {
            let per_trial: Vec<&TrialMetrics<f64>> = records.iter().filter_map(|r| r.get(algorithm)).collect();
            let stats = Metric::ALL
                .into_iter()
                .map(|metric| {
                    let values: Vec<f64> = per_trial.iter().map(|t| metric.of(t)).collect();
                    (metric, Stat::of(&values))
                })
                .collect();
            CellSummary { m, n, algorithm, trials: per_trial.len() as u64, stats }
        })
        .collect()
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepSummary> {
    sweep.validate()?;
    let mut cells = Vec::new();
    for &n in &sweep.n_values {
        for &m in &sweep.m_values {
            let records = run_cell(sweep, m, n)?;
            cells.extend(summarize_cell(m, n, &sweep.algorithms, &records));
        }
    }
    Ok(SweepSummary { cells })
}
