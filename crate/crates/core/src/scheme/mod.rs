//! Pluggable additively homomorphic encryption.
//!
//! Everything above this layer (the radix cache, the tensor codec, the
//! benchmarks) talks to a scheme only through [`AdditiveScheme`]: keygen,
//! encrypt, decrypt, and ciphertext addition. Two implementations ship
//! here: [`paillier::Paillier`] and the deliberately insecure
//! [`transparent::Transparent`] used for exhaustive tests.

pub mod paillier;
pub mod transparent;

use num_bigint::BigUint;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// An additively homomorphic public-key scheme over `Z_M` for a
/// per-key plaintext modulus `M`.
///
/// Contract, for any keypair and any plaintexts `a, b` with `a + b < M`:
/// `decrypt(add(encrypt(a), encrypt(b))) == a + b`. Implementations must
/// reject plaintexts outside `[0, M)` and refuse to combine ciphertexts
/// that belong to different keys.
pub trait AdditiveScheme: Sized + Send + Sync + 'static {
    type PublicKey: Clone + Serialize + DeserializeOwned + Send + Sync + 'static;
    type SecretKey: Clone + Serialize + DeserializeOwned + Send + Sync + 'static;
    type Ciphertext: Clone + PartialEq + Serialize + DeserializeOwned + Send + Sync + 'static;

    /// Short stable name, used in reports and CLI flags.
    const NAME: &'static str;

    /// Whether ciphertexts actually hide the plaintext. The transparent
    /// debug scheme returns false and must never leave a test bench.
    const SECURE: bool;

    fn keygen<R: Rng + ?Sized>(key_bits: u32, rng: &mut R) -> Result<SchemeKeyPair<Self>>;

    fn encrypt<R: Rng + ?Sized>(
        pk: &Self::PublicKey,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Self::Ciphertext>;

    fn decrypt(sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Result<BigUint>;

    /// Homomorphic addition of the underlying plaintexts (mod `M`).
    fn add(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext>;

    /// Plaintext modulus `M` of this key.
    fn plaintext_modulus(pk: &Self::PublicKey) -> &BigUint;

    /// Canonical byte form of a ciphertext, for hashing and distinctness
    /// checks. Equal ciphertexts yield equal bytes.
    fn ciphertext_bytes(ct: &Self::Ciphertext) -> Vec<u8>;
}

/// Keypair plus the size it was generated at.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SchemeKeyPair<S: AdditiveScheme> {
    pub public: S::PublicKey,
    pub secret: S::SecretKey,
    pub key_bits: u32,
}

/// Serde adapter storing big integers as decimal strings, so JSON stays
/// readable and round-trips without precision loss.
pub(crate) mod serde_uint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<BigUint>()
            .map_err(|e| serde::de::Error::custom(format!("bad integer literal: {e}")))
    }
}

/// First eight bytes of SHA-256 over a domain tag and the key's defining
/// integer, as a little-endian u64. Ciphertexts carry this so that adding
/// or decrypting under the wrong key fails loudly instead of silently
/// producing garbage.
pub(crate) fn key_fingerprint(tag: &str, modulus: &BigUint) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update(modulus.to_bytes_le());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
