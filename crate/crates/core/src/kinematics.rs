//! Unicycle ground truth, odometry synthesis and dead-reckoning propagation.

use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::belief::JointBelief;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Vec2};
use crate::params::SensorParams;
use crate::sensing::rotation;

/// Wrap an angle onto `[0, 2pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let r = angle % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Ground-truth planar pose of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotTruth {
    pub position: Vec2,
    heading: f64,
}

impl RobotTruth {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self { position, heading: wrap_two_pi(heading) }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    /// Advance by one step: the position moves along the current heading,
    /// then the heading turns by `turn_rate * dt`.
    pub fn step(&self, speed: f64, turn_rate: f64, dt: f64) -> Self {
        debug_assert!(dt > 0.0);
        let (s, c) = libm::sincos(self.heading);
        Self::new(self.position + Vec2::new(c, s) * (dt * speed), self.heading + dt * turn_rate)
    }
}

/// Encoder speed plus compass heading for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryReading {
    pub velocity: f64,
    pub heading: f64,
    pub dt: f64,
}

/// Noisy encoder and compass readings for a robot moving at `speed`.
///
/// The encoder reading saturates at `+-max_speed`. Always draws exactly two
/// normals from `rng`, whatever the noise levels are.
pub fn synthesize_odometry<R: Rng + ?Sized>(
    truth: &RobotTruth,
    speed: f64,
    dt: f64,
    params: &SensorParams,
    rng: &mut R,
) -> OdometryReading {
    let eta_v: f64 = rng.sample(StandardNormal);
    let eta_phi: f64 = rng.sample(StandardNormal);
    let velocity = (speed + params.velocity_std(speed) * eta_v).clamp(-params.max_speed, params.max_speed);
    OdometryReading { velocity, heading: truth.heading() + params.heading_std * eta_phi, dt }
}

/// Dead-reckoning step `x + dt v_m (cos phi_m, sin phi_m)`.
pub fn propagate_estimate(estimate: &Vec2, odometry: &OdometryReading) -> Vec2 {
    let (s, c) = libm::sincos(odometry.heading);
    estimate + Vec2::new(c, s) * (odometry.dt * odometry.velocity)
}

/// Process noise increment
/// `Q = dt^2 C(phi_m) diag(sigma_v(v_m)^2, v_m^2 sigma_phi^2) C(phi_m)^T`.
pub fn process_noise_increment(odometry: &OdometryReading, params: &SensorParams) -> Mat2 {
    let v = odometry.velocity;
    let sv = params.velocity_std(v);
    let along = sv * sv;
    let across = v * v * params.heading_std * params.heading_std;
    let c = rotation(odometry.heading);
    let q = c * Mat2::new(along, 0.0, 0.0, across) * c.transpose() * (odometry.dt * odometry.dt);
    // exact symmetry; the rotation sandwich leaves rounding in the corners
    let off = 0.5 * (q[(0, 1)] + q[(1, 0)]);
    Mat2::new(q[(0, 0)], off, off, q[(1, 1)])
}

/// Covariance propagation: `P_ii += Q_i`, cross blocks untouched.
pub fn propagate_covariance(belief: &mut JointBelief, increments: &[Mat2]) -> Result<()> {
    let n = belief.n_robots();
    if increments.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: increments.len() });
    }
    for q in increments {
        if !linalg::is_psd2(q) || libm::fabs(q[(0, 1)] - q[(1, 0)]) > 1e-9 * q.amax() {
            return Err(Error::NotPositiveSemiDefinite {
                what: "process noise increment",
                min_eigenvalue: linalg::eigen_extremes2(q).0,
            });
        }
    }
    let (_, cov) = belief.parts_mut();
    for (i, q) in increments.iter().enumerate() {
        let mut view = cov.fixed_view_mut::<2, 2>(2 * i, 2 * i);
        view += q;
    }
    Ok(())
}

/// Propagate estimates, covariance and timestep with one odometry reading
/// per robot.
pub fn propagate_belief(
    belief: &mut JointBelief,
    odometry: &[OdometryReading],
    params: &[SensorParams],
) -> Result<()> {
    let n = belief.n_robots();
    if odometry.len() != n || params.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: odometry.len().min(params.len()) });
    }
    let increments: alloc::vec::Vec<Mat2> =
        odometry.iter().zip(params).map(|(o, p)| process_noise_increment(o, p)).collect();
    propagate_covariance(belief, &increments)?;
    let (est, _) = belief.parts_mut();
    for (x, o) in est.iter_mut().zip(odometry) {
        *x = propagate_estimate(x, o);
    }
    let k = belief.timestep() + 1;
    belief.set_timestep(k);
    Ok(())
}
