//! Joint EKF update for relative measurements.
//!
//! A measurement `a -> b` touches every robot that is correlated with `a`
//! or `b`: the gain for robot `i` is `K_i = (P_ia Ha' + P_ib Hb') S^-1`.
//! Concurrent measurements are processed one after another, each one
//! relinearized against the belief left by the previous one.

use alloc::vec::Vec;

use crate::belief::JointBelief;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Vec2};
use crate::params::SensorParams;
use crate::sensing::{self, RelativeMeasurement};

/// Updates whose innovation covariance is worse conditioned than this are
/// skipped.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome {
    Applied,
    /// `S` was singular or ill-conditioned; the belief was left untouched.
    Skipped { condition: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRecord {
    pub observer: usize,
    pub target: usize,
    pub timestep: u64,
    /// One gain block per robot (all zero when skipped).
    pub gains: Vec<Mat2>,
    pub innovation: Vec2,
    pub innovation_covariance: Mat2,
    pub log_det_prior: f64,
    pub log_det_posterior: f64,
    pub outcome: UpdateOutcome,
}

impl UpdateRecord {
    pub fn applied(&self) -> bool {
        self.outcome == UpdateOutcome::Applied
    }
}

/// Apply one measurement to `belief`.
///
/// `headings` holds every robot's compass reading at the measurement time;
/// only the observer's is used. `params` are the observer's sensor
/// parameters.
pub fn ekf_update(
    belief: &mut JointBelief,
    m: &RelativeMeasurement,
    headings: &[f64],
    params: &SensorParams,
) -> Result<UpdateRecord> {
    let prior = belief.log_det();
    update_with_prior(belief, m, headings, params, prior)
}

/// Apply `measurements` in the given order. All must share a timestep.
/// `params` is indexed by observer.
///
/// The prior log-determinant is factored once; later records chain it
/// through `ln det R - ln det S`, which is exact for this update form.
pub fn sequential_update(
    belief: &mut JointBelief,
    measurements: &[RelativeMeasurement],
    headings: &[f64],
    params: &[SensorParams],
) -> Result<Vec<UpdateRecord>> {
    let Some(first) = measurements.first() else {
        return Ok(Vec::new());
    };
    if let Some(other) = measurements.iter().find(|m| m.timestep != first.timestep) {
        return Err(Error::MixedTimesteps { first: first.timestep, other: other.timestep });
    }
    let mut log_det = belief.log_det();
    let mut records = Vec::with_capacity(measurements.len());
    for m in measurements {
        let p = params
            .get(m.observer)
            .ok_or(Error::RobotOutOfRange { index: m.observer, n_robots: params.len() })?;
        let rec = update_with_prior(belief, m, headings, p, log_det)?;
        log_det = rec.log_det_posterior;
        records.push(rec);
    }
    Ok(records)
}

/// Sort into the canonical processing order: observer, then target.
pub fn canonical_order(measurements: &mut [RelativeMeasurement]) {
    measurements.sort_by_key(|m| (m.observer, m.target));
}

fn update_with_prior(
    belief: &mut JointBelief,
    m: &RelativeMeasurement,
    headings: &[f64],
    params: &SensorParams,
    log_det_prior: f64,
) -> Result<UpdateRecord> {
    let n = belief.n_robots();
    let (a, b) = (m.observer, m.target);
    belief.check_index(a)?;
    belief.check_index(b)?;
    if a == b {
        return Err(Error::SelfMeasurement(a));
    }
    if headings.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: headings.len() });
    }
    let heading = headings[a];
    let (xa, xb) = (belief.estimates()[a], belief.estimates()[b]);
    let lin = sensing::innovation_and_jacobians(m, &xa, &xb, heading);
    let noise = sensing::measurement_noise_covariance(m, &xa, &xb, heading, params);
    let cov = belief.covariance();
    let blk = |i, j| linalg::block(cov, i, j);
    let s = sensing::innovation_covariance(
        &lin.h_observer,
        &lin.h_target,
        &blk(a, a),
        &blk(a, b),
        &blk(b, a),
        &blk(b, b),
        &noise,
    )?;

    let mut record = UpdateRecord {
        observer: a,
        target: b,
        timestep: m.timestep,
        gains: alloc::vec![Mat2::zeros(); n],
        innovation: lin.innovation,
        innovation_covariance: s,
        log_det_prior,
        log_det_posterior: log_det_prior,
        outcome: UpdateOutcome::Applied,
    };
    let Some(s_inv) = linalg::inverse_spd2(&s, MAX_INNOVATION_CONDITION) else {
        record.outcome = UpdateOutcome::Skipped { condition: linalg::condition2(&s) };
        return Ok(record);
    };

    // cross terms P_i,(a,b) H' per robot; K_i = cross_i S^-1, so K_i S K_j' = cross_i K_j'
    let ha_t = lin.h_observer.transpose();
    let hb_t = lin.h_target.transpose();
    let cross: Vec<Mat2> = (0..n).map(|i| blk(i, a) * ha_t + blk(i, b) * hb_t).collect();
    for (k, c) in record.gains.iter_mut().zip(&cross) {
        *k = c * s_inv;
    }

    let (est, cov) = belief.parts_mut();
    for (x, k) in est.iter_mut().zip(&record.gains) {
        *x += k * lin.innovation;
    }
    for (i, c) in cross.iter().enumerate() {
        for (j, k) in record.gains.iter().enumerate() {
            let delta = c * k.transpose();
            let mut view = cov.fixed_view_mut::<2, 2>(2 * i, 2 * j);
            view -= delta;
        }
    }
    linalg::symmetrize(cov);

    let r_det = noise.total().determinant();
    let delta = if r_det > 0.0 {
        libm::log(r_det) - libm::log(s.determinant())
    } else {
        f64::NEG_INFINITY
    };
    record.log_det_posterior = log_det_prior + delta;
    Ok(record)
}
