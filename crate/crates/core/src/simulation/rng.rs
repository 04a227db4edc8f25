//! Counter-based RNG streams.
//!
//! Every random draw is made from a ChaCha8 stream keyed by
//! `(seed, a, b, purpose)`, so results do not depend on evaluation order or
//! thread count, and every (MCS, α) cell sees the same channels, noise and
//! payload bits for a given user and frame.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Drop = 1,
    Payload = 2,
    Channel = 3,
    Noise = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for the key `(seed, a, b, purpose)`.
pub fn stream(seed: u64, a: u64, b: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = splitmix64(seed);
    for (i, word) in [a, b, purpose as u64, 0x6E6F_6D61].into_iter().enumerate() {
        h = splitmix64(h ^ word);
        key[i * 8..(i + 1) * 8].copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream for frame `frame` of user `user`.
pub fn trial_stream(seed: u64, user: usize, frame: usize, purpose: Purpose) -> ChaCha8Rng {
    stream(seed, user as u64, frame as u64, purpose)
}

/// Stream for user drop number `drop`.
pub fn drop_stream(seed: u64, drop: usize) -> ChaCha8Rng {
    stream(seed, drop as u64, u64::MAX, Purpose::Drop)
}
