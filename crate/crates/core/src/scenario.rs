//! Simulated team runs.
//!
//! [`CooperativeFilter`] owns the joint belief together with the selection
//! state and optional checks, and is driven tick by tick either by
//! [`run_scenario`] or by a dataset replay.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{ceil, round, sqrt};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::belief::JointBelief;
use crate::bounds::BoundState;
use crate::error::{Error, Result};
use crate::fusion::{self, UpdateRecord};
use crate::kinematics::{self, OdometryReading, RobotTruth};
use crate::linalg::{self, Mat2, Vec2};
use crate::params::SensorParams;
use crate::scheduling::{self, Policy, PolicyInput, RandomSelector};
use crate::sensing::{generate_measurement, RelativeMeasurement};
use crate::streams::{stream_rng, Stream};

/// Allowed slack when comparing log-determinants.
pub const LOG_DET_SLACK: f64 = 1e-9;

/// Interval of simulated time during which `observers` may measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementWindow {
    pub start: f64,
    pub end: f64,
    /// Whether `start` itself belongs to the window; `end` always does.
    pub start_inclusive: bool,
    /// 0-based robot ids.
    pub observers: Vec<usize>,
}

impl MeasurementWindow {
    pub fn new(start: f64, end: f64, start_inclusive: bool, observers: &[usize]) -> Self {
        let mut observers = observers.to_vec();
        observers.sort_unstable();
        observers.dedup();
        Self { start, end, start_inclusive, observers }
    }

    /// Whether tick `k` of a run with step `dt` falls inside the window.
    pub fn contains_tick(&self, k: u64, dt: f64) -> bool {
        let (s, e) = (tick_of(self.start, dt), tick_of(self.end, dt));
        (k > s || (self.start_inclusive && k == s)) && k <= e
    }

    /// The default 100 s schedule for nine robots.
    pub fn default_schedule() -> Vec<MeasurementWindow> {
        let rows: [(f64, f64, &[usize]); 9] = [
            (0.0, 10.0, &[]),
            (10.0, 20.0, &[3, 5, 7, 9]),
            (20.0, 35.0, &[2, 6, 8]),
            (35.0, 40.0, &[1, 5, 7]),
            (40.0, 60.0, &[3, 4, 6, 9]),
            (60.0, 65.0, &[5, 7]),
            (65.0, 80.0, &[3, 6, 8]),
            (80.0, 95.0, &[1, 4, 9]),
            (95.0, 100.0, &[4, 6]),
        ];
        rows.iter()
            .map(|(s, e, ids)| {
                let zero_based: Vec<usize> = ids.iter().map(|i| i - 1).collect();
                MeasurementWindow::new(*s, *e, *s == 0.0, &zero_based)
            })
            .collect()
    }
}

fn tick_of(t: f64, dt: f64) -> u64 {
    round(t / dt) as u64
}

/// Everything that defines a simulated run apart from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_robots: usize,
    /// Step (s).
    pub dt: f64,
    /// Simulated time (s).
    pub duration: f64,
    /// Grid spacing of the initial formation (m).
    pub spacing: f64,
    /// True forward speed (m/s).
    pub speed: f64,
    /// True turn rate (rad/s).
    pub turn_rate: f64,
    /// Initial per-axis position variance (m^2).
    pub initial_variance: f64,
    pub params: Vec<SensorParams>,
    /// Measurement budget per robot.
    pub q: Vec<usize>,
    pub policy: Policy,
    /// Hold time of random selections (s).
    pub random_period: f64,
    pub windows: Vec<MeasurementWindow>,
    pub seed: u64,
    /// Monte Carlo repetitions.
    pub runs: usize,
    /// Maintain the bounded covariance next to the filter.
    pub track_bound: bool,
    /// Perturb the true turn rate with the gyro noise.
    pub heading_drift: bool,
    pub check_invariants: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let n = 9;
        Self {
            n_robots: n,
            dt: 0.1,
            duration: 100.0,
            spacing: 3.0,
            speed: 0.1,
            turn_rate: 0.1,
            initial_variance: 0.01,
            params: alloc::vec![SensorParams::default(); n],
            q: alloc::vec![1; n],
            policy: Policy::Alg1,
            random_period: 5.0,
            windows: MeasurementWindow::default_schedule(),
            seed: 0,
            runs: 50,
            track_bound: false,
            heading_drift: false,
            check_invariants: true,
        }
    }
}

impl ScenarioConfig {
    /// Resize per-robot tables to `n`, repeating the first entry.
    pub fn with_robots(mut self, n: usize) -> Self {
        let p = self.params.first().copied().unwrap_or_default();
        let q = self.q.first().copied().unwrap_or(1);
        self.n_robots = n;
        self.params = alloc::vec![p; n];
        self.q = alloc::vec![q; n];
        self
    }

    /// Shorten or lengthen the run, dropping windows that start after the
    /// new end and clipping the one that straddles it.
    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self.windows.retain(|w| w.start < duration);
        for w in &mut self.windows {
            w.end = w.end.min(duration);
        }
        self
    }

    pub fn with_q(mut self, q: usize) -> Self {
        self.q = alloc::vec![q; self.n_robots];
        self
    }

    pub fn ticks(&self) -> u64 {
        tick_of(self.duration, self.dt)
    }

    pub fn random_period_ticks(&self) -> u64 {
        tick_of(self.random_period, self.dt).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n_robots == 0 {
            return Err(Error::EmptyTeam);
        }
        for (name, v) in [
            ("dt", self.dt),
            ("duration", self.duration),
            ("random_period", self.random_period),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("spacing", self.spacing),
            ("speed", self.speed),
            ("initial_variance", self.initial_variance),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be non-negative"));
            }
        }
        if !self.turn_rate.is_finite() {
            return bad("turn_rate must be finite".into());
        }
        if self.params.len() != self.n_robots {
            return Err(Error::LengthMismatch { expected: self.n_robots, got: self.params.len() });
        }
        if self.q.len() != self.n_robots {
            return Err(Error::LengthMismatch { expected: self.n_robots, got: self.q.len() });
        }
        for p in &self.params {
            p.validate()?;
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        let mut ws: Vec<&MeasurementWindow> = self.windows.iter().collect();
        ws.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in &ws {
            if !(w.start >= 0.0 && w.start < w.end && w.end <= self.duration + 1e-9) {
                return bad(format!("window ({}, {}] is outside [0, {}]", w.start, w.end, self.duration));
            }
            if let Some(&i) = w.observers.iter().find(|&&i| i >= self.n_robots) {
                return bad(format!("window ({}, {}] names robot {} of {}", w.start, w.end, i + 1, self.n_robots));
            }
        }
        for pair in ws.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let overlap = b.start < a.end || (b.start == a.end && b.start_inclusive);
            if overlap {
                return bad(format!("windows ({}, {}] and ({}, {}] overlap", a.start, a.end, b.start, b.end));
            }
        }
        Ok(())
    }

    /// Observers allowed to measure at tick `k`.
    pub fn observers_at(&self, k: u64) -> &[usize] {
        self.windows
            .iter()
            .find(|w| w.contains_tick(k, self.dt))
            .map_or(&[], |w| w.observers.as_slice())
    }

    /// Row-major grid with `ceil(sqrt(N))` columns.
    pub fn formation(&self) -> Vec<Vec2> {
        let cols = ceil(sqrt(self.n_robots as f64)).max(1.0) as usize;
        (0..self.n_robots)
            .map(|i| Vec2::new((i % cols) as f64, (i / cols) as f64) * self.spacing)
            .collect()
    }

    pub fn filter_settings(&self) -> FilterSettings {
        FilterSettings {
            policy: self.policy,
            q: self.q.clone(),
            params: self.params.clone(),
            dt: self.dt,
            random_period_ticks: self.random_period_ticks(),
            track_bound: self.track_bound,
            check_invariants: self.check_invariants,
        }
    }
}

/// Knobs of a [`CooperativeFilter`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSettings {
    pub policy: Policy,
    pub q: Vec<usize>,
    pub params: Vec<SensorParams>,
    pub dt: f64,
    pub random_period_ticks: u64,
    pub track_bound: bool,
    pub check_invariants: bool,
}

/// One observer's choice at one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub observer: usize,
    /// Ascending.
    pub candidates: Vec<usize>,
    /// In the order the policy ranked them.
    pub selected: Vec<usize>,
    /// Landmark scores, filled for the score-based policies.
    pub scores: Vec<(usize, f64)>,
}

/// Tallies of checks made while filtering.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantReport {
    pub beliefs_checked: usize,
    pub validity_failures: usize,
    pub first_failure_tick: Option<u64>,
    pub measurements_processed: usize,
    pub skipped_updates: usize,
    /// Largest `ln det P+ - ln det P-` over single updates.
    pub max_update_log_det_increase: f64,
    pub update_increase_violations: usize,
    pub propagation_cross_changes: usize,
    pub bound_checks: usize,
    pub bound_violations: usize,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.validity_failures == 0
            && self.update_increase_violations == 0
            && self.propagation_cross_changes == 0
            && self.bound_violations == 0
    }

    fn fail_at(&mut self, tick: u64) {
        self.validity_failures += 1;
        self.first_failure_tick.get_or_insert(tick);
    }
}

/// Joint EKF plus landmark selection for a team.
#[derive(Debug, Clone)]
pub struct CooperativeFilter {
    belief: JointBelief,
    settings: FilterSettings,
    noise_bounds: Vec<f64>,
    random: RandomSelector,
    policy_rng: ChaCha8Rng,
    bound: Option<BoundState>,
    report: InvariantReport,
}

impl CooperativeFilter {
    /// `policy_seed` drives the random selector.
    pub fn new(belief: JointBelief, settings: FilterSettings, policy_seed: u64) -> Result<Self> {
        let n = belief.n_robots();
        if settings.params.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: settings.params.len() });
        }
        if settings.q.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: settings.q.len() });
        }
        let bound = if settings.track_bound {
            Some(BoundState::new(belief.covariance(), &settings.params, settings.dt)?)
        } else {
            None
        };
        let mut f = Self {
            noise_bounds: settings.params.iter().map(SensorParams::noise_bound).collect(),
            random: RandomSelector::new(settings.random_period_ticks),
            policy_rng: stream_rng(policy_seed, Stream::Policy),
            bound,
            report: InvariantReport::default(),
            belief,
            settings,
        };
        f.check_belief();
        Ok(f)
    }

    pub fn belief(&self) -> &JointBelief {
        &self.belief
    }

    pub fn settings(&self) -> &FilterSettings {
        &self.settings
    }

    pub fn report(&self) -> &InvariantReport {
        &self.report
    }

    pub fn bound(&self) -> Option<&BoundState> {
        self.bound.as_ref()
    }

    /// Dead-reckon every robot one step.
    pub fn propagate(&mut self, odometry: &[OdometryReading]) -> Result<()> {
        let before = self.settings.check_invariants.then(|| self.belief.covariance().clone());
        kinematics::propagate_belief(&mut self.belief, odometry, &self.settings.params)?;
        if let Some(b) = self.bound.as_mut() {
            b.propagate();
        }
        if let Some(before) = before {
            let n = self.belief.n_robots();
            let after = self.belief.covariance();
            let changed = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .any(|(i, j)| linalg::block(&before, i, j) != linalg::block(after, i, j));
            if changed {
                self.report.propagation_cross_changes += 1;
            }
            self.check_belief();
        }
        Ok(())
    }

    /// Choose measurements for each observer from `available` and apply them.
    ///
    /// Every observer decides from the belief as it stands before any of
    /// this tick's updates. The chosen measurements are then processed in
    /// canonical order. `headings` holds each robot's compass reading.
    pub fn observe(
        &mut self,
        available: &[RelativeMeasurement],
        headings: &[f64],
    ) -> Result<(Vec<Selection>, Vec<UpdateRecord>)> {
        let tick = self.belief.timestep();
        let mut observers: Vec<usize> = available.iter().map(|m| m.observer).collect();
        observers.sort_unstable();
        observers.dedup();
        let mut selections = Vec::with_capacity(observers.len());
        let mut chosen = Vec::new();
        for &a in &observers {
            let mut candidates: Vec<usize> =
                available.iter().filter(|m| m.observer == a).map(|m| m.target).collect();
            candidates.sort_unstable();
            if candidates.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidScenario(format!(
                    "robot {a} has two measurements of one target at tick {tick}"
                )));
            }
            let sel = self.select(a, candidates, headings, tick)?;
            chosen.extend(
                available.iter().filter(|m| m.observer == a && sel.selected.contains(&m.target)).copied(),
            );
            selections.push(sel);
        }
        fusion::canonical_order(&mut chosen);
        let records = self.apply(&chosen, headings)?;
        Ok((selections, records))
    }

    fn select(&mut self, a: usize, candidates: Vec<usize>, headings: &[f64], tick: u64) -> Result<Selection> {
        self.belief.check_index(a)?;
        let q = self.settings.q[a];
        let params = &self.settings.params[a];
        let input = || PolicyInput::from_belief(&self.belief, a, &candidates, q, self.noise_bounds[a]);
        let (selected, scores) = match self.settings.policy {
            Policy::Alg1 => {
                let input = input()?;
                (scheduling::select_alg1(&input), scheduling::landmark_scores(&input))
            }
            Policy::TakeAll => {
                let input = PolicyInput::from_belief(
                    &self.belief,
                    a,
                    &candidates,
                    candidates.len(),
                    self.noise_bounds[a],
                )?;
                (scheduling::select_alg1(&input), scheduling::landmark_scores(&input))
            }
            Policy::Random => {
                let input = input()?;
                (self.random.select(&input, tick, &mut self.policy_rng), Vec::new())
            }
            Policy::LogdetGreedy => {
                let g = scheduling::select_logdet_greedy(&self.belief, a, &candidates, q, headings, params)?;
                (g.selected, Vec::new())
            }
            Policy::BruteForce => {
                let (s, _) = scheduling::select_exhaustive(&self.belief, a, &candidates, q, headings, params)?;
                (s, Vec::new())
            }
        };
        Ok(Selection { observer: a, candidates, selected, scores })
    }

    /// Apply measurements in the order given.
    pub fn apply(
        &mut self,
        measurements: &[RelativeMeasurement],
        headings: &[f64],
    ) -> Result<Vec<UpdateRecord>> {
        let records = if self.settings.check_invariants {
            let mut records = Vec::with_capacity(measurements.len());
            for m in measurements {
                let p = self.observer_params(m.observer)?;
                let before = self.belief.log_det();
                let rec = fusion::ekf_update(&mut self.belief, m, headings, &p)?;
                let increase = self.belief.log_det() - before;
                self.report.max_update_log_det_increase =
                    self.report.max_update_log_det_increase.max(increase);
                if increase > LOG_DET_SLACK * before.abs().max(1.0) {
                    self.report.update_increase_violations += 1;
                }
                records.push(rec);
            }
            records
        } else {
            fusion::sequential_update(&mut self.belief, measurements, headings, &self.settings.params)?
        };
        for r in &records {
            self.report.measurements_processed += 1;
            if !r.applied() {
                self.report.skipped_updates += 1;
            } else if let Some(b) = self.bound.as_mut() {
                b.update(r.observer, r.target)?;
            }
        }
        if self.settings.check_invariants && !records.is_empty() {
            self.check_belief();
        }
        if let Some(b) = &self.bound {
            self.report.bound_checks += 1;
            let (real, upper) = (self.belief.log_det(), b.log_det());
            if real > upper + LOG_DET_SLACK * upper.abs().max(1.0) {
                self.report.bound_violations += 1;
            }
        }
        Ok(records)
    }

    fn observer_params(&self, a: usize) -> Result<SensorParams> {
        self.settings
            .params
            .get(a)
            .copied()
            .ok_or(Error::RobotOutOfRange { index: a, n_robots: self.settings.params.len() })
    }

    fn check_belief(&mut self) {
        if !self.settings.check_invariants {
            return;
        }
        self.report.beliefs_checked += 1;
        if !self.belief.check_validity().is_valid() {
            self.report.fail_at(self.belief.timestep());
        }
    }
}

/// Joint log-determinant and summed squared position error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub log_det: f64,
    pub sq_error: f64,
}

pub fn compute_metrics(belief: &JointBelief, truth: &[Vec2]) -> Result<Metrics> {
    if truth.len() != belief.n_robots() {
        return Err(Error::LengthMismatch { expected: belief.n_robots(), got: truth.len() });
    }
    let sq_error = belief.estimates().iter().zip(truth).map(|(x, t)| (x - t).norm_squared()).sum();
    Ok(Metrics { log_det: belief.log_det(), sq_error })
}

/// State of one tick after its updates.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub time: f64,
    pub log_det: f64,
    pub sq_error: f64,
    /// `det(P_ii)` per robot.
    pub robot_dets: Vec<f64>,
    pub selections: Vec<Selection>,
    pub bound_log_det: Option<f64>,
}

impl TickRecord {
    pub fn capture(
        filter: &CooperativeFilter,
        truth: &[Vec2],
        time: f64,
        selections: Vec<Selection>,
    ) -> Result<Self> {
        let b = filter.belief();
        let m = compute_metrics(b, truth)?;
        let robot_dets = (0..b.n_robots())
            .map(|i| linalg::block(b.covariance(), i, i).determinant())
            .collect();
        Ok(Self {
            tick: b.timestep(),
            time,
            log_det: m.log_det,
            sq_error: m.sq_error,
            robot_dets,
            selections,
            bound_log_det: filter.bound().map(BoundState::log_det),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub policy: Policy,
    pub ticks: Vec<TickRecord>,
    pub invariants: InvariantReport,
}

impl RunTrace {
    pub fn last(&self) -> &TickRecord {
        self.ticks.last().expect("a trace holds at least the initial tick")
    }

    pub fn final_log_det(&self) -> f64 {
        self.last().log_det
    }

    pub fn final_sq_error(&self) -> f64 {
        self.last().sq_error
    }

    /// Every recorded log-determinant is finite.
    pub fn is_finite(&self) -> bool {
        self.ticks.iter().all(|t| t.log_det.is_finite())
    }
}

/// Simulate one run.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<RunTrace> {
    cfg.validate()?;
    let n = cfg.n_robots;
    let mut init = stream_rng(seed, Stream::Init);
    let mut truths: Vec<RobotTruth> = cfg
        .formation()
        .into_iter()
        .map(|p| RobotTruth::new(p, init.random::<f64>() * core::f64::consts::TAU))
        .collect();
    let sd = sqrt(cfg.initial_variance);
    let estimates: Vec<Vec2> = truths
        .iter()
        .map(|t| {
            let e = Vec2::new(init.sample(StandardNormal), init.sample(StandardNormal));
            t.position + e * sd
        })
        .collect();
    let mut belief = JointBelief::new(&estimates, Mat2::identity() * cfg.initial_variance)?;
    belief.set_timestep(0);
    let mut filter = CooperativeFilter::new(belief, cfg.filter_settings(), seed)?;

    let mut truth_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream_rng(seed, Stream::Truth(i))).collect();
    let mut odo_rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream_rng(seed, Stream::Odometry(i))).collect();
    let mut meas_rngs: Vec<ChaCha8Rng> =
        (0..n).map(|i| stream_rng(seed, Stream::Measurement(i))).collect();

    let read_odometry = |truths: &[RobotTruth], rngs: &mut [ChaCha8Rng]| -> Vec<OdometryReading> {
        truths
            .iter()
            .zip(rngs.iter_mut())
            .zip(&cfg.params)
            .map(|((t, r), p)| kinematics::synthesize_odometry(t, cfg.speed, cfg.dt, p, r))
            .collect()
    };
    let positions = |truths: &[RobotTruth]| truths.iter().map(|t| t.position).collect::<Vec<_>>();

    let total = cfg.ticks();
    let mut ticks = Vec::with_capacity(total as usize + 1);
    ticks.push(TickRecord::capture(&filter, &positions(&truths), 0.0, Vec::new())?);
    let mut odometry = read_odometry(&truths, &mut odo_rngs);

    for k in 1..=total {
        filter.propagate(&odometry)?;
        for (i, t) in truths.iter_mut().enumerate() {
            let mut w = cfg.turn_rate;
            if cfg.heading_drift {
                let eta: f64 = truth_rngs[i].sample(StandardNormal);
                w += cfg.params[i].angular_velocity_std * eta;
            }
            *t = t.step(cfg.speed, w, cfg.dt);
        }
        odometry = read_odometry(&truths, &mut odo_rngs);
        let headings: Vec<f64> = odometry.iter().map(|o| o.heading).collect();

        let mut available = Vec::new();
        for &a in cfg.observers_at(k) {
            for b in (0..n).filter(|&b| b != a) {
                let m = generate_measurement(a, &truths[a], b, &truths[b], k, &cfg.params[a], &mut meas_rngs[a]);
                available.extend(m);
            }
        }
        let (selections, _) = filter.observe(&available, &headings)?;
        ticks.push(TickRecord::capture(&filter, &positions(&truths), k as f64 * cfg.dt, selections)?);
    }

    Ok(RunTrace { seed, policy: cfg.policy, ticks, invariants: filter.report().clone() })
}
