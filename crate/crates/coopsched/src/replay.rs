//! Filtering a gridded dataset window.
//!
//! The dataset has no compass, so each robot's heading reading is its
//! interpolated groundtruth heading plus compass noise.

use coopsched_core::kinematics::OdometryReading;
use coopsched_core::scenario::{FilterSettings, TickRecord};
use coopsched_core::scheduling::Policy;
use coopsched_core::sensing::RelativeMeasurement;
use coopsched_core::streams::{stream_rng, Stream};
use coopsched_core::{CooperativeFilter, JointBelief, Mat2, RunTrace, SensorParams, Vec2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::HarnessError;
use crate::utias::ReplayGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySettings {
    pub policy: Policy,
    pub q: usize,
    pub params: SensorParams,
    pub initial_variance: f64,
    /// Hold time of random selections (s).
    pub random_period: f64,
    pub seed: u64,
    pub check_invariants: bool,
}

impl Default for ReplaySettings {
    fn default() -> Self {
        Self {
            policy: Policy::Alg1,
            q: 1,
            params: SensorParams::default(),
            initial_variance: 0.01,
            random_period: 30.0,
            seed: 0,
            check_invariants: true,
        }
    }
}

pub fn replay(grid: &ReplayGrid, settings: &ReplaySettings) -> Result<RunTrace, HarnessError> {
    let n = grid.n_robots();
    if n < 2 || grid.ticks() < 2 {
        return Err(HarnessError::Invalid("replay needs at least two robots and two ticks".into()));
    }
    let p = settings.params;
    let seed = settings.seed;
    let mut init = stream_rng(seed, Stream::Init);
    let sd = settings.initial_variance.sqrt();
    let positions = |k: usize| grid.truth[k].iter().map(|g| Vec2::new(g.x, g.y)).collect::<Vec<_>>();
    let estimates: Vec<Vec2> = positions(0)
        .into_iter()
        .map(|x| x + Vec2::new(init.sample(StandardNormal), init.sample(StandardNormal)) * sd)
        .collect();
    let belief = JointBelief::new(&estimates, Mat2::identity() * settings.initial_variance)?;
    let settings_core = FilterSettings {
        policy: settings.policy,
        q: vec![settings.q; n],
        params: vec![p; n],
        dt: grid.dt,
        random_period_ticks: ((settings.random_period / grid.dt).round() as u64).max(1),
        track_bound: false,
        check_invariants: settings.check_invariants,
    };
    let mut filter = CooperativeFilter::new(belief, settings_core, seed)?;
    let mut compass_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream_rng(seed, Stream::Odometry(i))).collect();
    let mut compass = |k: usize| -> Vec<f64> {
        grid.truth[k]
            .iter()
            .zip(compass_rngs.iter_mut())
            .map(|(g, r)| g.heading + p.heading_std * r.sample::<f64, _>(StandardNormal))
            .collect()
    };

    let mut ticks = Vec::with_capacity(grid.ticks());
    ticks.push(TickRecord::capture(&filter, &positions(0), 0.0, Vec::new())?);
    let mut headings = compass(0);
    for k in 1..grid.ticks() {
        let odometry: Vec<OdometryReading> = (0..n)
            .map(|i| OdometryReading { velocity: grid.velocity[k - 1][i], heading: headings[i], dt: grid.dt })
            .collect();
        filter.propagate(&odometry)?;
        headings = compass(k);
        let available: Vec<RelativeMeasurement> = grid.measurements[k]
            .iter()
            .map(|g| RelativeMeasurement::from_range_bearing(g.observer, g.target, k as u64, g.range, g.bearing))
            .collect();
        let (selections, _) = filter.observe(&available, &headings)?;
        ticks.push(TickRecord::capture(&filter, &positions(k), k as f64 * grid.dt, selections)?);
    }
    Ok(RunTrace { seed, policy: settings.policy, ticks, invariants: filter.report().clone() })
}
