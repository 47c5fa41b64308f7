//! Random well-conditioned problem instances for sweeps and benchmarks.

use coopsched_core::{JointBelief, Vec2};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// `G G'` with unit-normal entries.
pub fn gram<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &g * g.transpose()
}

/// Positive definite `2N x 2N` covariance around 0.01 m^2 per axis.
pub fn random_covariance<R: Rng + ?Sized>(rng: &mut R, n_robots: usize) -> DMatrix<f64> {
    let dim = 2 * n_robots;
    let mut p = gram(rng, dim) * (0.01 / dim as f64);
    for i in 0..dim {
        p[(i, i)] += 1e-3;
    }
    p = (&p + p.transpose()) * 0.5;
    p
}

/// Belief with estimates uniform in a `side x side` square.
pub fn random_belief<R: Rng + ?Sized>(rng: &mut R, n_robots: usize, side: f64) -> JointBelief {
    let cov = random_covariance(rng, n_robots);
    let est = (0..n_robots)
        .map(|_| Vec2::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    JointBelief::from_parts(est, cov).expect("constructed symmetric")
}

pub fn random_headings<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn covariances_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..8 {
            let b = random_belief(&mut rng, n, 6.0);
            assert!(b.check_validity().is_valid());
            assert!(b.check_validity().min_eigenvalue >= 1e-3 - 1e-12);
        }
    }
}
