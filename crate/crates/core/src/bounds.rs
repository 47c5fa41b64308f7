//! Upper bounds on the joint covariance and its determinant.
//!
//! Replacing the process noise by the constant `Q_check >= Q` and the
//! measurement noise by `r_c I >= R_c` gives a covariance recursion
//! `P_check` that dominates the filter's `P` whenever both start equal. For
//! a single measurement `a -> b` the determinant of the bounded posterior
//! is in turn bounded by
//!
//! ```text
//! det(P_check-) / (1 + tr(P_aa + P_ba P_aa^-1 P_ab - P_ab - P_ba) / r_c)
//! ```
//!
//! whose denominator only involves blocks that robot `a` stores locally.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, PSD_TOLERANCE};
use crate::params::SensorParams;

/// Relative slack used when reporting whether a lemma holds.
pub const LEMMA_SLACK: f64 = 1e-10;

/// `Q_check = dt^2 max(sigma_v(v_max)^2, v_max^2 sigma_phi^2) I`
pub fn process_noise_bound(params: &SensorParams, dt: f64) -> Mat2 {
    let sv = params.velocity_std(params.max_speed);
    let across = params.max_speed * params.heading_std;
    Mat2::identity() * (dt * dt * (sv * sv).max(across * across))
}

/// `r_c = sigma_rho^2 + (sigma_phi^2 + sigma_theta^2) rho_max^2`
pub fn noise_bound(params: &SensorParams) -> f64 {
    params.noise_bound()
}

/// `tr(P_aa + P_ab' P_aa^-1 P_ab - P_ab - P_ab')`, given `P_aa^-1`.
///
/// Evaluated as `tr(D' P_aa^-1 D)` with `D = P_aa - P_ab`, which is the
/// same quantity for symmetric `P_aa` and never negative.
pub fn correlation_trace(p_aa: &Mat2, p_ab: &Mat2, p_aa_inv: &Mat2) -> f64 {
    let d = p_aa - p_ab;
    (d.transpose() * p_aa_inv * d).trace()
}

/// Bounded posterior `((P_check)^-1 + r_c^-1 H' H)^-1` for a measurement
/// `a -> b`, with `H = [0 .. -I .. I .. 0]`.
///
/// Computed as the rank-2 downdate
/// `P - (H P)' (r_c I + H P H')^-1 (H P)`, which needs no inverse of `P`.
pub fn bounded_update(p: &DMatrix<f64>, a: usize, b: usize, r_c: f64) -> Result<DMatrix<f64>> {
    let n = p.nrows() / 2;
    for idx in [a, b] {
        if idx >= n {
            return Err(Error::RobotOutOfRange { index: idx, n_robots: n });
        }
    }
    if a == b {
        return Err(Error::SelfMeasurement(a));
    }
    for idx in [a, b] {
        let (lo, _) = linalg::eigen_extremes2(&linalg::block(p, idx, idx));
        if !(lo > 0.0) {
            return Err(Error::Singular { what: "bounded covariance" });
        }
    }
    let hp = p.rows(2 * b, 2) - p.rows(2 * a, 2);
    let hph = hp.columns(2 * b, 2) - hp.columns(2 * a, 2);
    let gram = Mat2::identity() * r_c + Mat2::new(hph[(0, 0)], hph[(0, 1)], hph[(1, 0)], hph[(1, 1)]);
    let inv = linalg::inverse_spd2(&gram, f64::INFINITY)
        .ok_or(Error::Singular { what: "bounded innovation" })?;
    let inv = DMatrix::from_row_slice(2, 2, &[inv[(0, 0)], inv[(0, 1)], inv[(1, 0)], inv[(1, 1)]]);
    let mut out = p - hp.transpose() * inv * &hp;
    linalg::symmetrize(&mut out);
    Ok(out)
}

/// Right-hand side of the single-measurement determinant bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantBound {
    pub log_det_prior: f64,
    pub trace_term: f64,
    pub denominator: f64,
    /// `log_det_prior - ln(denominator)`
    pub log_value: f64,
}

impl DeterminantBound {
    pub fn value(&self) -> f64 {
        libm::exp(self.log_value)
    }
}

pub fn determinant_bound(p: &DMatrix<f64>, a: usize, b: usize, r_c: f64) -> Result<DeterminantBound> {
    let n = p.nrows() / 2;
    for idx in [a, b] {
        if idx >= n {
            return Err(Error::RobotOutOfRange { index: idx, n_robots: n });
        }
    }
    let log_det_prior = linalg::log_det(p).ok_or(Error::Singular { what: "prior covariance" })?;
    let p_aa = linalg::block(p, a, a);
    let p_ab = linalg::block(p, a, b);
    let inv = linalg::inverse_spd2(&p_aa, 1e12).ok_or(Error::Singular { what: "observer block" })?;
    let trace_term = correlation_trace(&p_aa, &p_ab, &inv);
    let denominator = 1.0 + trace_term / r_c;
    Ok(DeterminantBound {
        log_det_prior,
        trace_term,
        denominator,
        log_value: log_det_prior - libm::log(denominator),
    })
}

/// `det(I + A) >= 1 + tr(A)` for PSD `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetTraceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn det_trace_inequality(a: &DMatrix<f64>) -> Result<DetTraceCheck> {
    require_psd(a, "A")?;
    let n = a.nrows();
    let shifted = DMatrix::<f64>::identity(n, n) + a;
    let lhs = linalg::log_det(&shifted).map(libm::exp).unwrap_or(0.0);
    let rhs = 1.0 + a.trace();
    Ok(DetTraceCheck { lhs, rhs, holds: lhs >= rhs - LEMMA_SLACK * rhs.abs().max(1.0) && rhs > 0.0 })
}

/// `tr(A + C - B - B') >= tr(A + B A^-1 B' - B - B') >= 0` when
/// `[[A, B'], [B, C]]` is PSD and `A` is PD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceChainCheck {
    pub outer: f64,
    pub inner: f64,
    pub holds: bool,
}

pub fn trace_chain_inequality(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<TraceChainCheck> {
    let n = a.nrows();
    if !a.is_square() || b.shape() != (n, n) || c.shape() != (n, n) {
        return Err(Error::LengthMismatch { expected: n, got: b.nrows().max(c.nrows()) });
    }
    let mut joint = DMatrix::<f64>::zeros(2 * n, 2 * n);
    joint.view_mut((0, 0), (n, n)).copy_from(a);
    joint.view_mut((0, n), (n, n)).copy_from(&b.transpose());
    joint.view_mut((n, 0), (n, n)).copy_from(b);
    joint.view_mut((n, n), (n, n)).copy_from(c);
    require_psd(&joint, "[[A, B'], [B, C]]")?;
    let a_inv = a.clone().cholesky().ok_or(Error::Singular { what: "A" })?.inverse();
    let bsum = b.trace() * 2.0;
    let outer = a.trace() + c.trace() - bsum;
    let inner = a.trace() + (b * a_inv * b.transpose()).trace() - bsum;
    let scale = a.trace().abs() + c.trace().abs() + 2.0 * b.abs().trace().max(b.amax());
    let slack = LEMMA_SLACK * scale.max(1.0);
    Ok(TraceChainCheck { outer, inner, holds: outer >= inner - slack && inner >= -slack })
}

fn require_psd(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    let residual = linalg::symmetry_residual(m);
    if residual > 1e-9 * linalg::max_abs(m).max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { what, residual });
    }
    let (lo, hi) = linalg::eigen_extremes(m);
    if lo < -PSD_TOLERANCE * hi.max(0.0) {
        return Err(Error::NotPositiveSemiDefinite { what, min_eigenvalue: lo });
    }
    Ok(())
}

/// Bounded covariance maintained next to a running filter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    covariance: DMatrix<f64>,
    process_bounds: Vec<Mat2>,
    noise_bounds: Vec<f64>,
}

impl BoundState {
    pub fn new(initial: &DMatrix<f64>, params: &[SensorParams], dt: f64) -> Result<Self> {
        if initial.nrows() != 2 * params.len() {
            return Err(Error::LengthMismatch { expected: 2 * params.len(), got: initial.nrows() });
        }
        Ok(Self {
            covariance: initial.clone(),
            process_bounds: params.iter().map(|p| process_noise_bound(p, dt)).collect(),
            noise_bounds: params.iter().map(noise_bound).collect(),
        })
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn log_det(&self) -> f64 {
        linalg::log_det(&self.covariance).unwrap_or(f64::NEG_INFINITY)
    }

    /// `P_check += diag(Q_check_i)`
    pub fn propagate(&mut self) {
        for (i, q) in self.process_bounds.iter().enumerate() {
            let mut view = self.covariance.fixed_view_mut::<2, 2>(2 * i, 2 * i);
            view += q;
        }
    }

    pub fn update(&mut self, observer: usize, target: usize) -> Result<()> {
        let r = *self
            .noise_bounds
            .get(observer)
            .ok_or(Error::RobotOutOfRange { index: observer, n_robots: self.noise_bounds.len() })?;
        self.covariance = bounded_update(&self.covariance, observer, target, r)?;
        Ok(())
    }
}
