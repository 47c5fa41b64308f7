//! Wall-clock cost of the local and joint-covariance selectors.

use std::hint::black_box;
use std::time::{Duration, Instant};

use coopsched_core::scheduling::{select_alg1, select_logdet_greedy, PolicyInput};
use coopsched_core::{JointBelief, SensorParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sampling::{random_belief, random_headings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n_robots: usize,
    pub q: usize,
    /// Mean seconds per observer decision.
    pub alg1: f64,
    pub logdet_greedy: f64,
    pub trials: usize,
}

const BATCHES: usize = 5;
const MIN_BATCH: Duration = Duration::from_millis(3);

/// Mean time of one call of `f` over `items`: the fastest of several
/// batches, each repeated until it lasts at least a few milliseconds.
fn time_per_call<T>(items: &[T], mut f: impl FnMut(&T)) -> f64 {
    let mut reps = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            items.iter().for_each(&mut f);
        }
        if start.elapsed() >= MIN_BATCH || reps >= 1 << 20 {
            break;
        }
        reps *= 2;
    }
    (0..BATCHES)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                items.iter().for_each(&mut f);
            }
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
        / (reps * items.len()) as f64
}

/// Time both selectors for robot 0 choosing `q` of the other `N - 1`
/// robots, over `trials` random beliefs per `(N, q)`.
pub fn bench_scheduling(ns: &[usize], qs: &[usize], trials: usize, seed: u64) -> Vec<BenchRow> {
    let params = SensorParams::default();
    let r_c = params.noise_bound();
    let mut rows = Vec::new();
    for &n in ns {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let cases: Vec<(JointBelief, Vec<f64>)> = (0..trials.max(1))
            .map(|_| (random_belief(&mut rng, n, 6.0), random_headings(&mut rng, n)))
            .collect();
        let candidates: Vec<usize> = (1..n).collect();
        for &q in qs {
            let alg1 = time_per_call(&cases, |(b, _)| {
                let input = PolicyInput::from_belief(b, 0, &candidates, q, r_c).expect("valid input");
                black_box(select_alg1(&input));
            });
            let greedy = time_per_call(&cases, |(b, h)| {
                black_box(select_logdet_greedy(b, 0, &candidates, q, h, &params).expect("valid input"));
            });
            rows.push(BenchRow { n_robots: n, q, alg1, logdet_greedy: greedy, trials: cases.len() });
        }
    }
    rows
}
