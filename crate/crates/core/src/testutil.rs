use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{JointBelief, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G G^T` with unit-normal entries.
pub fn gram(r: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    &g * g.transpose()
}

/// Positive definite joint covariance of order-0.01 m^2 scale.
pub fn random_covariance(r: &mut impl Rng, n_robots: usize) -> DMatrix<f64> {
    let dim = 2 * n_robots;
    let mut p = gram(r, dim) * (0.01 / dim as f64);
    for i in 0..dim {
        p[(i, i)] += 1e-3;
    }
    crate::linalg::symmetrize(&mut p);
    p
}

pub fn random_positions(r: &mut impl Rng, n_robots: usize, side: f64) -> Vec<Vec2> {
    (0..n_robots)
        .map(|_| Vec2::new(r.random::<f64>() * side, r.random::<f64>() * side))
        .collect()
}

pub fn random_belief(r: &mut impl Rng, n_robots: usize) -> JointBelief {
    let cov = random_covariance(r, n_robots);
    let pos = random_positions(r, n_robots, 6.0);
    JointBelief::from_parts(pos, cov).unwrap()
}
