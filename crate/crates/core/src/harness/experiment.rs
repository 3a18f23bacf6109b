use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{summarize_target, MetricsRecord, TargetSummary};
use crate::model::GgiwState;
use crate::par::map_indexed;
use crate::sim::{simulate_run, Simulation};
use crate::tracker::Tracker;
use crate::update::Scheme;

use super::ExperimentConfig;

/// A run stopped by a tracker error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortedRun {
    pub run: usize,
    pub step: usize,
    pub error: String,
}

/// Everything produced by one Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub simulation: Simulation,
    /// Posterior states after each completed scan; index `k` is scan `k + 1`.
    pub estimates: Vec<Vec<GgiwState>>,
    pub records: Vec<MetricsRecord>,
    pub aborted: Option<AbortedRun>,
    /// Target-scans that received no measurements.
    pub coasting: usize,
    pub total_events: usize,
    pub tracking_seconds: f64,
}

/// Deterministic digest of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: Scheme,
    pub lambda_c: f64,
    pub lambda_t: f64,
    pub mc_runs: usize,
    pub completed_runs: usize,
    pub aborted: Vec<AbortedRun>,
    pub coasting_updates: usize,
    pub mean_events_per_scan: f64,
    /// Aggregates over the completed runs, one entry per target.
    pub targets: Vec<TargetSummary>,
}

/// Wall-clock measurements, kept apart from [`Summary`] so the summary is
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub workers: usize,
    pub total_seconds: f64,
    /// Sum of the tracking time of all runs (simulation and scoring excluded).
    pub tracking_seconds: f64,
    pub tracking_seconds_per_run: f64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
    pub timing: Timing,
}

impl Experiment {
    pub fn any_aborted(&self) -> bool {
        !self.summary.aborted.is_empty()
    }
}

/// Tracks one simulated run; a tracker error ends the run early.
pub fn track_run(config: &ExperimentConfig, run: usize) -> Result<RunResult> {
    let simulation = simulate_run(&config.scenario, run)?;
    let tracker_config = config.tracker.tracker_config(&config.scenario);
    let initial = config.tracker.initial.states(&simulation.truth)?;
    let mut tracker = Tracker::new(tracker_config, initial)?;
    let mut result = RunResult {
        run,
        simulation: Simulation { truth: Vec::new(), frames: Vec::new() },
        estimates: Vec::with_capacity(simulation.frames.len()),
        records: Vec::new(),
        aborted: None,
        coasting: 0,
        total_events: 0,
        tracking_seconds: 0.0,
    };
    for (k, frame) in simulation.frames.iter().enumerate() {
        let step = k + 1;
        let start = Instant::now();
        let report = tracker.step(frame);
        result.tracking_seconds += start.elapsed().as_secs_f64();
        match report {
            Ok(report) => {
                result.coasting += report.coasting();
                result.total_events += report.n_events;
            }
            Err(e) => {
                log::warn!("run {run} aborted at scan {step}: {e}");
                result.aborted = Some(AbortedRun { run, step, error: e.to_string() });
                break;
            }
        }
        for (n, (state, truth)) in tracker.states().iter().zip(&simulation.truth).enumerate() {
            let center = truth.center(step);
            result.records.push(MetricsRecord::score(run, step, n + 1, (&center, &truth.extent), state)?);
        }
        result.estimates.push(tracker.states().to_vec());
    }
    result.simulation = simulation;
    Ok(result)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let start = Instant::now();
    let runs = map_indexed(config.mc_runs, config.workers, |r| track_run(config, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let total_seconds = start.elapsed().as_secs_f64();
    let summary = summarize(config, &runs)?;
    let tracking_seconds: f64 = runs.iter().map(|r| r.tracking_seconds).sum();
    let timing = Timing {
        workers: config.workers,
        total_seconds,
        tracking_seconds,
        tracking_seconds_per_run: tracking_seconds / runs.len() as f64,
    };
    Ok(Experiment { config: config.clone(), runs, summary, timing })
}

pub fn summarize(config: &ExperimentConfig, runs: &[RunResult]) -> Result<Summary> {
    let completed: Vec<&RunResult> = runs.iter().filter(|r| r.aborted.is_none()).collect();
    let records: Vec<MetricsRecord> = completed.iter().flat_map(|r| r.records.iter().copied()).collect();
    let n_steps = config.scenario.duration_steps;
    let targets = if completed.is_empty() {
        Vec::new()
    } else {
        (1..=config.scenario.targets.len())
            .map(|n| summarize_target(&records, n, n_steps))
            .collect::<Result<_>>()?
    };
    let scans: usize = runs.iter().map(|r| r.estimates.len()).sum();
    let events: usize = runs.iter().map(|r| r.total_events).sum();
    Ok(Summary {
        scheme: config.tracker.update.scheme,
        lambda_c: config.scenario.lambda_c,
        lambda_t: config.scenario.lambda_t,
        mc_runs: config.mc_runs,
        completed_runs: completed.len(),
        aborted: runs.iter().filter_map(|r| r.aborted.clone()).collect(),
        coasting_updates: runs.iter().map(|r| r.coasting).sum(),
        mean_events_per_scan: if scans == 0 { 0.0 } else { events as f64 / scans as f64 },
        targets,
    })
}
