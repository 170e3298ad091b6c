//! Deterministic random-stream derivation.
//!
//! Everything stochastic in this crate draws from a ChaCha stream whose seed
//! is derived, not shared: a [`StreamKey`] is hashed down from the master
//! seed through labels and indices, so any unit of work (an episode, a search
//! node, a sampled observation) owns an independent stream that does not
//! depend on execution or traversal order. Running the same work serially or
//! fanned across threads therefore produces bit-identical results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::Real;

/// SplitMix64 finalizer; full-period bijective mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifier of one derived random stream.
///
/// Keys form a tree: the root is the master seed, children are derived with
/// [`StreamKey::label`] (a static role name) and [`StreamKey::index`] (a
/// position such as an episode number, action, or sample index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    /// Root key for a master seed.
    pub fn root(seed: u64) -> Self {
        StreamKey(mix(seed))
    }

    /// Child key for a named role, e.g. `"episode"` or `"search"`.
    pub fn label(self, name: &str) -> Self {
        let mut k = self.0;
        for &b in name.as_bytes() {
            k = mix(k ^ u64::from(b));
        }
        StreamKey(mix(k))
    }

    /// Child key for a numeric position.
    pub fn index(self, i: u64) -> Self {
        StreamKey(mix(self.0 ^ mix(i)))
    }

    /// Raw key value; exposed so traces can echo the stream they used.
    pub fn value(self) -> u64 {
        self.0
    }

    /// Instantiate the stream.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Draw an index from an unnormalized nonnegative weight vector by inverse
/// CDF over a single uniform draw. Weights summing to anything positive are
/// accepted; zero-weight entries are never returned.
pub fn sample_weighted<F: Real, R: Rng>(rng: &mut R, weights: &[F]) -> usize {
    let total: F = weights.iter().copied().sum();
    assert!(
        total > F::zero(),
        "sample_weighted needs a positive total weight"
    );
    let u = F::from_f64_lossy(rng.random::<f64>()) * total;
    let mut acc = F::zero();
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > F::zero() {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    // Rounding can leave `acc` a hair under `total`; land on the last
    // positive-weight entry rather than an impossible one.
    last_positive
}
