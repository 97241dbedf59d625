//! Seeded random streams keyed by (node, purpose). Each consumer draws from
//! its own stream, so refactoring event dispatch order cannot change which
//! numbers anyone sees.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream slot for draws that belong to the scenario rather than a node.
pub const WORLD: u64 = u64::MAX;

/// What a stream's numbers are used for; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Placement,
    LaneSpeed,
    VehicleSpeed,
    Turn,
    Jitter,
    FloodSlot,
    Persistence,
    Loss,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lazily created ChaCha streams, all derived from one 64-bit run seed.
pub struct RandomStreams {
    seed: u64,
    streams: HashMap<(u64, Purpose), ChaCha8Rng>,
}

impl RandomStreams {
    pub fn new(seed: u64) -> Self {
        RandomStreams { seed, streams: HashMap::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The stream for (node, purpose), created on first use.
    pub fn stream(&mut self, node: u64, purpose: Purpose) -> &mut ChaCha8Rng {
        let seed = self.seed;
        self.streams.entry((node, purpose)).or_insert_with(|| {
            let label = splitmix64(splitmix64(splitmix64(seed) ^ node) ^ purpose as u64);
            ChaCha8Rng::seed_from_u64(label)
        })
    }

    /// Uniform draw in [a, b); the empty range a == b yields a.
    pub fn uniform(&mut self, node: u64, purpose: Purpose, a: f64, b: f64) -> f64 {
        assert!(a <= b, "uniform bounds out of order: [{a}, {b})");
        if a == b {
            return a;
        }
        self.stream(node, purpose).random_range(a..b)
    }

    /// Uniform integer in [0, n).
    pub fn uniform_int(&mut self, node: u64, purpose: Purpose, n: u32) -> u32 {
        assert!(n > 0, "empty integer range");
        self.stream(node, purpose).random_range(0..n)
    }
}
