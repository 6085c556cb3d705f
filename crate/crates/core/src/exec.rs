//! Restart fan-out: rayon when the `parallel` feature is on, plain iteration
//! otherwise. Results come back in index order either way, so reductions over
//! them are strategy-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Independent, order-insensitive RNG stream for one restart.
pub(crate) fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&restart.to_le_bytes());
    bytes[16] = 0x6d;
    ChaCha8Rng::from_seed(bytes)
}

#[cfg(feature = "parallel")]
pub(crate) fn map_restarts<T, F>(count: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel && count > 1 {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_restarts<T, F>(count: usize, _parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
