//! Seed derivation. Every random stream in a run is a ChaCha8 generator
//! whose seed is a pure function of the master seed, a purpose tag and an
//! index (round, fold, trial).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags keep independent streams apart for the same index.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Stream {
    Relabel = 1,
    UnlabeledBatch = 2,
    FreshLabeled = 3,
    Split = 4,
    Noise = 5,
    Drop = 6,
    Synth = 7,
    Trial = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(master ^ splitmix64((stream as u64) << 56 ^ splitmix64(index)))
}

pub fn stream_rng(master: u64, stream: Stream, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, stream, index))
}
