//! CSV and JSON renderings of runs, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use coopsched_core::{RunTrace, ScenarioConfig};
use serde_json::json;

use crate::bench::BenchRow;
use crate::config::serialize_config;
use crate::error::HarnessError;
use crate::harness::MonteCarlo;

pub const TRACE_HEADER: &str = "tick,time_s,logdet,rmse_agg,robot_id,det_robot,selected_ids";
pub const SELECTION_HEADER: &str = "tick,observer,candidates,selected,scores";
pub const BENCH_HEADER: &str = "n_robots,q,trials,alg1_us,logdet_greedy_us";

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// One row per tick and robot; robot ids are 1-based.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for t in &trace.ticks {
        for (i, det) in t.robot_dets.iter().enumerate() {
            let selected = t
                .selections
                .iter()
                .find(|s| s.observer == i)
                .map_or_else(String::new, |s| join(s.selected.iter().map(|j| j + 1)));
            let _ = writeln!(out, "{},{},{},{},{},{},{}", t.tick, t.time, t.log_det, t.sq_error, i + 1, det, selected);
        }
    }
    out
}

/// One row per observer decision.
pub fn selection_csv(trace: &RunTrace) -> String {
    let mut out = String::from(SELECTION_HEADER);
    out.push('\n');
    for t in &trace.ticks {
        for s in &t.selections {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                t.tick,
                s.observer + 1,
                join(s.candidates.iter().map(|j| j + 1)),
                join(s.selected.iter().map(|j| j + 1)),
                join(s.scores.iter().map(|(_, v)| v)),
            );
        }
    }
    out
}

pub fn aggregate_json(mc: &MonteCarlo, cfg: &ScenarioConfig) -> serde_json::Value {
    json!({
        "seed": mc.master_seed,
        "runs": mc.runs.len(),
        "policy": mc.policy.name(),
        "time_s": mc.times,
        "log_mean_det": mc.log_mean_det,
        "mean_rmse": mc.mean_sq_error,
        "run_seeds": mc.runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
        "final_log_det": mc.runs.iter().map(|r| r.final_log_det).collect::<Vec<_>>(),
        "invariants_clean": mc.all_clean(),
        "config": serialize_config(cfg),
    })
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:.3},{:.3}", r.n_robots, r.q, r.trials, r.alg1 * 1e6, r.logdet_greedy * 1e6);
    }
    out
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use coopsched_core::run_scenario;

    #[test]
    fn trace_csv_shape() {
        let cfg = ScenarioConfig::default().with_duration(11.0);
        let t = run_scenario(&cfg, 1).unwrap();
        let csv = trace_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(csv.lines().count(), 1 + 111 * 9);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 7);
        assert_eq!((first[0], first[4], first[6]), ("0", "1", ""));
        // robot 3 observes at tick 101 with q = 1
        let row = csv.lines().find(|l| l.starts_with("101,") && l.split(',').nth(4) == Some("3")).unwrap();
        let ids = row.split(',').nth(6).unwrap();
        assert_eq!(ids.split(';').count(), 1);
        let sel = selection_csv(&t);
        assert!(sel.starts_with(SELECTION_HEADER));
        assert!(sel.lines().skip(1).all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
