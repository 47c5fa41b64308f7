//! Monte Carlo studies over [`run_scenario`].

use coopsched_core::scenario::InvariantReport;
use coopsched_core::scheduling::Policy;
use coopsched_core::streams::derive_run_seed;
use coopsched_core::{run_scenario, RunTrace, ScenarioConfig};
use rayon::prelude::*;

use crate::error::HarnessError;

/// Environment variable capping the worker threads of a study.
pub const THREADS_ENV: &str = "COOPSCHED_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub index: usize,
    pub seed: u64,
    pub final_log_det: f64,
    pub final_sq_error: f64,
    pub invariants: InvariantReport,
}

/// Per-tick aggregates of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub master_seed: u64,
    pub policy: Policy,
    pub times: Vec<f64>,
    /// `ln((1/M) sum det P)` per tick.
    pub log_mean_det: Vec<f64>,
    /// Mean over runs of the summed squared position error per tick.
    pub mean_sq_error: Vec<f64>,
    pub runs: Vec<RunSummary>,
}

impl MonteCarlo {
    pub fn final_log_mean_det(&self) -> f64 {
        *self.log_mean_det.last().expect("at least one tick")
    }

    pub fn final_mean_sq_error(&self) -> f64 {
        *self.mean_sq_error.last().expect("at least one tick")
    }

    pub fn all_clean(&self) -> bool {
        self.runs.iter().all(|r| r.invariants.is_clean())
    }
}

/// `ln(mean(exp(x)))` without overflow.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln() - (xs.len() as f64).ln()
}

fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| HarnessError::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| HarnessError::Invalid(e.to_string()))
}

/// Traces of `runs` independent runs, in run order.
pub fn run_traces(cfg: &ScenarioConfig, runs: usize, master_seed: u64) -> Result<Vec<RunTrace>, HarnessError> {
    if runs == 0 {
        return Err(HarnessError::Invalid("at least one run is required".into()));
    }
    cfg.validate()?;
    let pool = thread_pool()?;
    let results: Vec<Result<RunTrace, HarnessError>> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|index| {
                let seed = derive_run_seed(master_seed, index as u64);
                run_scenario(cfg, seed).map_err(|source| HarnessError::RunFailed { index, seed, source })
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Aggregate traces that share a tick grid.
pub fn aggregate(traces: &[RunTrace], master_seed: u64) -> Result<MonteCarlo, HarnessError> {
    let first = traces.first().ok_or_else(|| HarnessError::Invalid("no traces".into()))?;
    let ticks = first.ticks.len();
    if traces.iter().any(|t| t.ticks.len() != ticks) {
        return Err(HarnessError::Invalid("traces have different lengths".into()));
    }
    let m = traces.len() as f64;
    let mut log_mean_det = Vec::with_capacity(ticks);
    let mut mean_sq_error = Vec::with_capacity(ticks);
    let mut column = Vec::with_capacity(traces.len());
    for k in 0..ticks {
        column.clear();
        column.extend(traces.iter().map(|t| t.ticks[k].log_det));
        log_mean_det.push(log_mean_exp(&column));
        mean_sq_error.push(traces.iter().map(|t| t.ticks[k].sq_error).sum::<f64>() / m);
    }
    Ok(MonteCarlo {
        master_seed,
        policy: first.policy,
        times: first.ticks.iter().map(|t| t.time).collect(),
        log_mean_det,
        mean_sq_error,
        runs: traces
            .iter()
            .enumerate()
            .map(|(index, t)| RunSummary {
                index,
                seed: t.seed,
                final_log_det: t.final_log_det(),
                final_sq_error: t.final_sq_error(),
                invariants: t.invariants.clone(),
            })
            .collect(),
    })
}

/// `runs` seeded repetitions of `cfg` and their aggregate. Run `i` uses
/// `derive_run_seed(master_seed, i)`, so two studies with the same master
/// seed see the same truth and noise whatever their policies.
pub fn run_monte_carlo(cfg: &ScenarioConfig, runs: usize, master_seed: u64) -> Result<MonteCarlo, HarnessError> {
    aggregate(&run_traces(cfg, runs, master_seed)?, master_seed)
}
