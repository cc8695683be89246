//! Counter-based seed expansion.
//!
//! Every random stream in the pipeline is derived from one global seed plus a
//! component label and a counter, so parallel work never shares generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and releases, unlike `DefaultHasher`.
fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives the seed of stream `counter` of component `label`.
pub fn derive(global: u64, label: &str, counter: u64) -> u64 {
    splitmix64(splitmix64(global ^ fnv1a(label)).wrapping_add(counter))
}

pub fn rng(global: u64, label: &str, counter: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(global, label, counter))
}
