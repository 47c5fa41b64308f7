//! The team's joint belief: stacked position estimates and the `2N x 2N`
//! joint covariance, addressed as an `N x N` grid of 2x2 blocks.
//!
//! Robots are indexed from 0 inside the library.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Vec2, PSD_TOLERANCE};

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JointBelief {
    estimates: Vec<Vec2>,
    covariance: DMatrix<f64>,
    timestep: u64,
}

impl JointBelief {
    /// Fresh belief with every diagonal block set to `block` and zero
    /// cross-covariances.
    pub fn new(positions: &[Vec2], block: Mat2) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyTeam);
        }
        let residual = libm::fabs(block[(0, 1)] - block[(1, 0)]);
        if residual > SYMMETRY_TOLERANCE * block.amax() {
            return Err(Error::NotSymmetric { what: "initial covariance block", residual });
        }
        if !linalg::is_psd2(&block) {
            return Err(Error::NotPositiveSemiDefinite {
                what: "initial covariance block",
                min_eigenvalue: linalg::eigen_extremes2(&block).0,
            });
        }
        let n = positions.len();
        let mut covariance = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            linalg::set_block(&mut covariance, i, i, &block);
        }
        Ok(Self { estimates: positions.to_vec(), covariance, timestep: 0 })
    }

    /// Belief from explicit parts. The covariance must be `2N x 2N` and
    /// symmetric; it is not otherwise validated (see [`Self::check_validity`]).
    pub fn from_parts(estimates: Vec<Vec2>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = estimates.len();
        if n == 0 {
            return Err(Error::EmptyTeam);
        }
        if covariance.nrows() != 2 * n || covariance.ncols() != 2 * n {
            return Err(Error::LengthMismatch { expected: 2 * n, got: covariance.nrows() });
        }
        let residual = linalg::symmetry_residual(&covariance);
        if residual > SYMMETRY_TOLERANCE * linalg::max_abs(&covariance) {
            return Err(Error::NotSymmetric { what: "joint covariance", residual });
        }
        Ok(Self { estimates, covariance, timestep: 0 })
    }

    pub fn n_robots(&self) -> usize {
        self.estimates.len()
    }

    pub fn timestep(&self) -> u64 {
        self.timestep
    }

    pub fn set_timestep(&mut self, k: u64) {
        self.timestep = k;
    }

    pub fn estimates(&self) -> &[Vec2] {
        &self.estimates
    }

    pub fn estimate(&self, i: usize) -> Result<Vec2> {
        self.check_index(i)?;
        Ok(self.estimates[i])
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Block `P_ij` by value.
    pub fn block(&self, i: usize, j: usize) -> Result<Mat2> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(linalg::block(&self.covariance, i, j))
    }

    pub fn log_det(&self) -> f64 {
        linalg::log_det(&self.covariance).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn check_validity(&self) -> Validity {
        Validity::of(&self.covariance)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n_robots() {
            Ok(())
        } else {
            Err(Error::RobotOutOfRange { index: i, n_robots: self.n_robots() })
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [Vec2], &mut DMatrix<f64>) {
        (&mut self.estimates, &mut self.covariance)
    }
}

/// Result of [`JointBelief::check_validity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// Largest `|P_ij - P_ji^T|` entry.
    pub symmetry_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub symmetric: bool,
    pub psd: bool,
    pub diagonal_blocks_psd: bool,
}

impl Validity {
    pub fn of(covariance: &DMatrix<f64>) -> Self {
        let symmetry_residual = linalg::symmetry_residual(covariance);
        let scale = linalg::max_abs(covariance);
        let symmetric = symmetry_residual <= SYMMETRY_TOLERANCE * scale;
        let (min_eigenvalue, max_eigenvalue) = linalg::eigen_extremes(covariance);
        let psd = min_eigenvalue >= -PSD_TOLERANCE * max_eigenvalue.max(0.0);
        let n = covariance.nrows() / 2;
        let diagonal_blocks_psd = (0..n).all(|i| linalg::is_psd2(&linalg::block(covariance, i, i)));
        Self { symmetry_residual, min_eigenvalue, max_eigenvalue, symmetric, psd, diagonal_blocks_psd }
    }

    pub fn is_valid(&self) -> bool {
        self.symmetric && self.psd && self.diagonal_blocks_psd
    }
}
