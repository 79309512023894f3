//! Seed derivation for reproducible runs.
//!
//! Every random draw in the toolkit comes from a [`ChaCha8Rng`] whose seed is
//! derived from the run seed, a stage tag and the index of the item being
//! processed. Work items therefore never share a stream, and the output does
//! not depend on how many threads processed them or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the pipeline stage that owns a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Word2Vec,
    MaskedLm,
    Custom(u64),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Word2Vec => 0x7732_7600_0000_0001,
            Stream::MaskedLm => 0x6d6c_6d00_0000_0002,
            Stream::Custom(tag) => tag,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the run seed, stage and item index into a 64-bit child seed.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    let h = splitmix64(seed ^ splitmix64(stream.tag()));
    splitmix64(h ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// Random stream for one work item.
pub fn item_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}
