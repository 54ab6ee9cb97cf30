//! Desk-scale laboratory for coset-state copy protection.
//!
//! The crate bundles exact F₂ linear algebra, a dense quantum register
//! simulator, a GGM puncturable PRF, an opaque-handle stand-in for
//! obfuscation, reverse resampling, the steganographic ACE scheme,
//! threshold implementations and runnable security-game harnesses.
//! Everything is seeded and small enough to be checked exhaustively.

pub mod ace;
pub mod error;
pub mod games;
pub mod gf2;
pub mod obf;
pub mod prf;
pub mod quantum;
pub mod resample;
pub mod stats;
pub mod threshold;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout. Seeded explicitly so runs are reproducible.
pub type LabRng = ChaCha8Rng;

/// Independent stream `stream` under a master seed.
///
/// Trials get one stream each, so fanning them out across workers never
/// changes what any single trial observes.
pub fn stream_rng(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
