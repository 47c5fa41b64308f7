//! Randomized checks of the determinant bound and the two matrix
//! inequalities behind it.

use coopsched_core::bounds::{det_trace_inequality, determinant_bound, trace_chain_inequality};
use coopsched_core::fusion::ekf_update;
use coopsched_core::kinematics::RobotTruth;
use coopsched_core::sensing::generate_measurement;
use coopsched_core::{JointBelief, SensorParams, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::HarnessError;
use crate::sampling::{gram, random_covariance};

/// Relative slack on the determinant bound.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub name: &'static str,
    pub instances: usize,
    pub violations: usize,
    /// Draws thrown away for not meeting the preconditions.
    pub rejected: usize,
    /// Largest `lhs - rhs` seen (log space for the determinant bound).
    pub worst_margin: f64,
}

impl SweepReport {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, violations: 0, rejected: 0, worst_margin: f64::NEG_INFINITY }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.instances > 0
    }
}

/// Posterior log-determinant of real EKF updates against the bound, over
/// teams of 2 to 6 robots with in-range geometry.
pub fn verify_determinant_bound(instances: usize, seed: u64) -> Result<SweepReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SensorParams::default();
    let r_c = params.noise_bound();
    let mut rep = SweepReport::new("determinant bound");
    while rep.instances < instances {
        let n = rng.random_range(2..=6);
        let cov = random_covariance(&mut rng, n);
        let truth: Vec<RobotTruth> = (0..n)
            .map(|_| {
                let p = Vec2::new(rng.random::<f64>() * 6.0, rng.random::<f64>() * 6.0);
                RobotTruth::new(p, rng.random::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        let estimates: Vec<Vec2> = truth
            .iter()
            .map(|t| t.position + Vec2::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.2)
            .collect();
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        let headings: Vec<f64> =
            truth.iter().map(|t| t.heading() + params.heading_std * (rng.random::<f64>() - 0.5)).collect();
        let m = generate_measurement(a, &truth[a], b, &truth[b], 0, &params, &mut rng);
        let in_range = m.is_some_and(|m| m.range <= params.max_range)
            && (estimates[b] - estimates[a]).norm() <= params.max_range;
        let Some(m) = m.filter(|_| in_range) else {
            rep.rejected += 1;
            continue;
        };
        let bound = determinant_bound(&cov, a, b, r_c)?;
        let mut belief = JointBelief::from_parts(estimates, cov)?;
        ekf_update(&mut belief, &m, &headings, &params)?;
        let margin = belief.log_det() - bound.log_value;
        rep.worst_margin = rep.worst_margin.max(margin);
        if margin > BOUND_SLACK.ln_1p() {
            rep.violations += 1;
        }
        rep.instances += 1;
    }
    Ok(rep)
}

/// `det(I + A) >= 1 + tr(A)` on random PSD matrices of order 1 to 6.
pub fn verify_det_trace(instances: usize, seed: u64) -> Result<SweepReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SweepReport::new("det(I + A) >= 1 + tr A");
    for _ in 0..instances {
        let n = rng.random_range(1..=6);
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let c = det_trace_inequality(&(gram(&mut rng, n) * scale))?;
        rep.worst_margin = rep.worst_margin.max((c.rhs - c.lhs) / c.rhs.abs().max(1.0));
        rep.instances += 1;
        if !c.holds {
            rep.violations += 1;
        }
    }
    Ok(rep)
}

/// `tr(A + C - B - B') >= tr(A + B A^-1 B' - B - B') >= 0` on random PSD
/// block matrices `[[A, B'], [B, C]]` with blocks of order 1 to 4.
pub fn verify_trace_chain(instances: usize, seed: u64) -> Result<SweepReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SweepReport::new("tr(A + C - B - B') >= tr(A + B A^-1 B' - B - B') >= 0");
    for _ in 0..instances {
        let n = rng.random_range(1..=4);
        let m = gram(&mut rng, 2 * n);
        let a = m.view((0, 0), (n, n)).into_owned();
        let b = m.view((n, 0), (n, n)).into_owned();
        let c = m.view((n, n), (n, n)).into_owned();
        let r = trace_chain_inequality(&a, &b, &c)?;
        rep.worst_margin = rep.worst_margin.max((r.inner - r.outer).max(-r.inner));
        rep.instances += 1;
        if !r.holds {
            rep.violations += 1;
        }
    }
    Ok(rep)
}
