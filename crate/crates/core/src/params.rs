use crate::error::{Error, Result};

/// Noise and range characteristics of one robot's sensors.
///
/// Defaults are the noise table used for the simulated and replayed teams:
/// wheel-encoder noise with standard deviation `2.253 |v|`, compass noise
/// 0.0349 rad, range noise 0.147 m and bearing noise 0.1 rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    /// Encoder noise std per unit speed: `sigma_v(v) = coeff * |v|`.
    pub velocity_noise_coeff: f64,
    /// Lower limit on the encoder noise std (m/s), so a stopped robot
    /// still contributes a non-degenerate process noise.
    pub velocity_noise_floor: f64,
    /// Gyro noise std (rad/s). Only used to perturb the simulated ground
    /// truth heading; the filter takes heading from the compass.
    pub angular_velocity_std: f64,
    /// Compass noise std (rad).
    pub heading_std: f64,
    pub range_std: f64,
    pub bearing_std: f64,
    /// Maximum linear speed (m/s). Encoder readings saturate at this value.
    pub max_speed: f64,
    /// Sensing range (m).
    pub max_range: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            velocity_noise_coeff: 2.253,
            velocity_noise_floor: 1e-6,
            angular_velocity_std: 0.587,
            heading_std: 0.0349,
            range_std: 0.147,
            bearing_std: 0.1,
            max_speed: 1.0,
            max_range: 10.0,
        }
    }
}

impl SensorParams {
    pub fn validate(&self) -> Result<()> {
        let stds = [
            self.velocity_noise_coeff,
            self.velocity_noise_floor,
            self.angular_velocity_std,
            self.heading_std,
            self.range_std,
            self.bearing_std,
        ];
        if stds.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams("noise standard deviations must be finite and >= 0"));
        }
        if !(self.max_speed > 0.0) || !self.max_speed.is_finite() {
            return Err(Error::InvalidParams("max_speed must be > 0"));
        }
        if !(self.max_range > 0.0) || !self.max_range.is_finite() {
            return Err(Error::InvalidParams("max_range must be > 0"));
        }
        Ok(())
    }

    /// Encoder noise std at speed `v`.
    pub fn velocity_std(&self, v: f64) -> f64 {
        (self.velocity_noise_coeff * libm::fabs(v)).max(self.velocity_noise_floor)
    }

    /// Scalar `r_c` with `R_c <= r_c I` for every in-range measurement:
    /// `sigma_rho^2 + (sigma_phi^2 + sigma_theta^2) * rho_max^2`.
    pub fn noise_bound(&self) -> f64 {
        let rho2 = self.max_range * self.max_range;
        self.range_std * self.range_std
            + self.heading_std * self.heading_std * rho2
            + self.bearing_std * self.bearing_std * rho2
    }

    /// All noise switched off; handy for deterministic checks.
    pub fn noiseless() -> Self {
        Self {
            velocity_noise_coeff: 0.0,
            velocity_noise_floor: 0.0,
            angular_velocity_std: 0.0,
            heading_std: 0.0,
            range_std: 0.0,
            bearing_std: 0.0,
            ..Self::default()
        }
    }
}
