//! Cached additively homomorphic encryption.
//!
//! Additive schemes like Paillier pay a modular exponentiation per
//! encryption. When plaintexts are bounded integers, this crate trades
//! that cost for a one-time setup: encrypt the radix powers covering the
//! range plus a pool of zeros ([`cache::RadixCache`]), then assemble any
//! ciphertext with homomorphic additions alone, randomized by folding in
//! a coin-flipped subset of the zero pool. [`tensor`] lifts this to
//! quantized float tensors and their homomorphic aggregation, [`cost`]
//! models the per-value addition count and shows why radix 2 is the
//! right choice, and [`scheme`] defines the encryption interface with a
//! real ([`Paillier`]) and a test-only ([`Transparent`]) backend.
//!
//! ```
//! use hecache::{AdditiveScheme, CacheParams, Paillier, RadixCache};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
//! let pair = Paillier::keygen(256, &mut rng).unwrap();
//! let cache = RadixCache::<Paillier>::build(
//!     &pair.public,
//!     CacheParams { radix: 2, bit_width: 16, zero_pool: 32, min_zero_inclusions: 1 },
//!     &mut rng,
//! )
//! .unwrap();
//!
//! let ct = cache.encrypt(40_000, &mut rng).unwrap();
//! let m = Paillier::decrypt(&pair.secret, &ct).unwrap();
//! assert_eq!(m, 40_000u32.into());
//! ```
//!
//! With the default `parallel` feature, tensor encryption and the
//! brute-force cost scan fan out over a thread pool; disabling it leaves
//! the same APIs single-threaded (minus the explicit `*_par` variants).

pub mod cache;
pub mod cost;
pub mod error;
pub mod scheme;
pub mod tensor;

pub use cache::{addition_count, digits, AddCounts, CacheParams, RadixCache, RadixDigits, ZeroMask};
pub use error::{Error, Result};
pub use scheme::paillier::{self, Paillier};
pub use scheme::transparent::Transparent;
pub use scheme::{AdditiveScheme, SchemeKeyPair};
pub use tensor::{QuantMode, QuantParams, TensorCipher, TensorPlain};
