//! Independent random streams for one simulated run.
//!
//! Each noise source gets its own ChaCha stream under the run seed, so
//! changing how many draws one source makes (for instance a different
//! selection policy) never shifts the noise seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Initial estimate errors and headings.
    Init,
    /// Truth heading drift for one robot.
    Truth(usize),
    /// Encoder and compass noise for one robot.
    Odometry(usize),
    /// Relative measurement noise for one observer.
    Measurement(usize),
    /// Random draws made by a selection policy.
    Policy,
}

impl Stream {
    fn id(self) -> u64 {
        let (kind, index) = match self {
            Stream::Init => (0u64, 0usize),
            Stream::Truth(i) => (1, i),
            Stream::Odometry(i) => (2, i),
            Stream::Measurement(i) => (3, i),
            Stream::Policy => (4, 0),
        };
        (kind << 32) | index as u64
    }
}

pub fn stream_rng(run_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(stream.id());
    rng
}

/// Seed of run `index` under `master` (SplitMix64 finalizer).
pub fn derive_run_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
