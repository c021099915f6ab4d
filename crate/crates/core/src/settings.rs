//! Process-wide numeric settings: the float tolerance `eps_num` and the seed
//! for sampled checks.
//!
//! Both are read on every float comparison / sampled check, so they are kept
//! in atomics rather than threaded through every call.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;
/// Environment variable overriding the default tolerance.
pub const TOLERANCE_ENV: &str = "COMCAT_TOLERANCE";
/// Number of random pure states used by sampled PSD positivity checks.
pub const PSD_SAMPLES: usize = 64;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);
static SEED: AtomicU64 = AtomicU64::new(DEFAULT_SEED);

pub fn tolerance() -> f64 {
    let bits = TOLERANCE_BITS.load(Ordering::Relaxed);
    if bits == 0 {
        DEFAULT_TOLERANCE
    } else {
        f64::from_bits(bits)
    }
}

pub fn set_tolerance(eps: f64) {
    assert!(eps > 0.0 && eps.is_finite(), "tolerance must be positive");
    TOLERANCE_BITS.store(eps.to_bits(), Ordering::Relaxed);
}

/// Applies `COMCAT_TOLERANCE` if it is set and parses as a positive float.
pub fn tolerance_from_env() -> Option<f64> {
    let eps: f64 = std::env::var(TOLERANCE_ENV).ok()?.trim().parse().ok()?;
    (eps > 0.0 && eps.is_finite()).then(|| {
        set_tolerance(eps);
        eps
    })
}

pub fn seed() -> u64 {
    SEED.load(Ordering::Relaxed)
}

pub fn set_seed(seed: u64) {
    SEED.store(seed, Ordering::Relaxed);
}

/// A fresh generator for one sampled check. `stream` separates independent
/// checks so that adding a check does not shift the samples of another.
pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}
