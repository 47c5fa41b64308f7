//! Relative range-bearing measurements between robots, their Cartesian
//! form, linearization and noise covariances.

use core::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kinematics::RobotTruth;
use crate::linalg::{Mat2, Vec2};
use crate::params::SensorParams;

/// Rotation `[[cos, -sin], [sin, cos]]`.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = libm::sincos(angle);
    Mat2::new(c, -s, s, c)
}

/// `J = [[0, 1], [-1, 0]]`
pub fn perp() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

/// Wrap onto `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let mut r = angle % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// One observation `observer -> target` taken at `timestep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeMeasurement {
    pub observer: usize,
    pub target: usize,
    pub timestep: u64,
    /// Measured range (m), never negative.
    pub range: f64,
    /// Measured bearing in the observer frame (rad), in `(-pi, pi]`.
    pub bearing: f64,
    /// `range * (cos bearing, sin bearing)`
    pub z: Vec2,
}

impl RelativeMeasurement {
    /// Builds the Cartesian form. A negative range is folded into the
    /// opposite bearing, which leaves `z` unchanged.
    pub fn from_range_bearing(
        observer: usize,
        target: usize,
        timestep: u64,
        range: f64,
        bearing: f64,
    ) -> Self {
        let (range, bearing) = if range < 0.0 { (-range, bearing + PI) } else { (range, bearing) };
        let bearing = wrap_pi(bearing);
        let (s, c) = libm::sincos(bearing);
        Self { observer, target, timestep, range, bearing, z: Vec2::new(c, s) * range }
    }
}

/// Simulated sensor reading of `target` by `observer`, or `None` when the
/// true range exceeds `params.max_range`.
///
/// Noise is added to range and bearing before conversion to Cartesian.
#[allow(clippy::too_many_arguments)]
pub fn generate_measurement<R: Rng + ?Sized>(
    observer: usize,
    observer_truth: &RobotTruth,
    target: usize,
    target_truth: &RobotTruth,
    timestep: u64,
    params: &SensorParams,
    rng: &mut R,
) -> Option<RelativeMeasurement> {
    debug_assert_ne!(observer, target);
    let d = target_truth.position - observer_truth.position;
    let range = d.norm();
    if range > params.max_range {
        return None;
    }
    let local = rotation(observer_truth.heading()).transpose() * d;
    let bearing = libm::atan2(local.y, local.x);
    let eta_rho: f64 = rng.sample(StandardNormal);
    let eta_theta: f64 = rng.sample(StandardNormal);
    Some(RelativeMeasurement::from_range_bearing(
        observer,
        target,
        timestep,
        range + params.range_std * eta_rho,
        bearing + params.bearing_std * eta_theta,
    ))
}

/// The reading the observer expects from its current estimates; used to
/// evaluate candidate measurements before they are taken.
pub fn predicted_measurement(
    observer: usize,
    target: usize,
    timestep: u64,
    observer_estimate: &Vec2,
    target_estimate: &Vec2,
    observer_heading: f64,
) -> RelativeMeasurement {
    let local = rotation(observer_heading).transpose() * (target_estimate - observer_estimate);
    RelativeMeasurement::from_range_bearing(
        observer,
        target,
        timestep,
        local.norm(),
        libm::atan2(local.y, local.x),
    )
}

/// Innovation and measurement Jacobians w.r.t. observer and target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    pub innovation: Vec2,
    pub h_observer: Mat2,
    pub h_target: Mat2,
}

pub fn innovation_and_jacobians(
    m: &RelativeMeasurement,
    observer_estimate: &Vec2,
    target_estimate: &Vec2,
    observer_heading: f64,
) -> Linearization {
    let ct = rotation(observer_heading).transpose();
    Linearization {
        innovation: m.z - ct * (target_estimate - observer_estimate),
        h_observer: -ct,
        h_target: ct,
    }
}

/// The two noise terms of the innovation covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementNoise {
    /// Range-bearing sensor noise mapped to Cartesian, `R_z`.
    pub relative: Mat2,
    /// Noise induced by the observer's compass error, `R_phi` (rank <= 1).
    pub heading: Mat2,
}

impl MeasurementNoise {
    pub fn total(&self) -> Mat2 {
        self.relative + self.heading
    }
}

pub fn measurement_noise_covariance(
    m: &RelativeMeasurement,
    observer_estimate: &Vec2,
    target_estimate: &Vec2,
    observer_heading: f64,
    params: &SensorParams,
) -> MeasurementNoise {
    let c_theta = rotation(m.bearing);
    let sr = params.range_std;
    let st = m.range * params.bearing_std;
    let relative = c_theta * Mat2::new(sr * sr, 0.0, 0.0, st * st) * c_theta.transpose();

    let w = rotation(observer_heading).transpose() * perp() * (target_estimate - observer_estimate);
    let heading = w * w.transpose() * (params.heading_std * params.heading_std);
    MeasurementNoise { relative: exact_sym(relative), heading: exact_sym(heading) }
}

fn exact_sym(m: Mat2) -> Mat2 {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Mat2::new(m[(0, 0)], off, off, m[(1, 1)])
}

/// `S = Ha Paa Ha' + Ha Pab Hb' + Hb Pbb Hb' + Hb Pba Ha' + R_phi + R_z`
#[allow(clippy::too_many_arguments)]
pub fn innovation_covariance(
    h_observer: &Mat2,
    h_target: &Mat2,
    p_aa: &Mat2,
    p_ab: &Mat2,
    p_ba: &Mat2,
    p_bb: &Mat2,
    noise: &MeasurementNoise,
) -> Result<Mat2> {
    let s = h_observer * p_aa * h_observer.transpose()
        + h_observer * p_ab * h_target.transpose()
        + h_target * p_bb * h_target.transpose()
        + h_target * p_ba * h_observer.transpose()
        + noise.heading
        + noise.relative;
    let residual = libm::fabs(s[(0, 1)] - s[(1, 0)]);
    if residual > 1e-9 * s.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { what: "innovation covariance", residual });
    }
    Ok(exact_sym(s))
}
