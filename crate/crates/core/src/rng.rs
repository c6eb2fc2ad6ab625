//! Seeded, counter-addressed random streams.
//!
//! Every randomized routine in this crate draws from a stream obtained via
//! [`substream`]. Streams are independent for distinct ids and independent
//! of evaluation order, so parallel code produces identical results for any
//! thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic stream `id` derived from `master`.
pub fn substream(master: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}
