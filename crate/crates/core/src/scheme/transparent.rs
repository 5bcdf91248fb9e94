//! Transparent stand-in scheme for exhaustive correctness tests.
//!
//! A "ciphertext" is the pair (plaintext sum, nonce sum) mod `2^key_bits`;
//! addition is componentwise. It hides nothing and must never be used
//! outside tests and benchmarks, but it makes sweeps over every plaintext
//! in a range cheap, and the nonce component still distinguishes two
//! encryptions of the same value the way a real randomizer would.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{key_fingerprint, serde_uint, AdditiveScheme, SchemeKeyPair};
use crate::error::{Error, Result};

const MIN_KEY_BITS: u32 = 16;
const MAX_KEY_BITS: u32 = 4096;
const NONCE_BITS: u64 = 128;
const KEY_TAG: &str = "transparent";

#[derive(Debug, Clone, Copy)]
pub enum Transparent {}

/// Public and secret key are the same object: the modulus `2^key_bits`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "KeyRepr", into = "KeyRepr")]
pub struct TransparentKey {
    modulus: BigUint,
    key_bits: u32,
    key_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransparentCiphertext {
    #[serde(with = "serde_uint")]
    sum: BigUint,
    #[serde(with = "serde_uint")]
    nonce: BigUint,
    key_id: u64,
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    key_bits: u32,
}

impl From<TransparentKey> for KeyRepr {
    fn from(k: TransparentKey) -> Self {
        KeyRepr {
            key_bits: k.key_bits,
        }
    }
}

impl TryFrom<KeyRepr> for TransparentKey {
    type Error = Error;

    fn try_from(repr: KeyRepr) -> Result<Self> {
        key_from_bits(repr.key_bits)
    }
}

impl TransparentKey {
    pub fn key_id(&self) -> u64 {
        self.key_id
    }
}

fn key_from_bits(key_bits: u32) -> Result<TransparentKey> {
    if key_bits < MIN_KEY_BITS {
        return Err(Error::KeyTooSmall {
            got: key_bits,
            min: MIN_KEY_BITS,
        });
    }
    if key_bits > MAX_KEY_BITS {
        return Err(Error::InvalidKey(format!(
            "key size {key_bits} exceeds the {MAX_KEY_BITS}-bit cap"
        )));
    }
    let modulus = BigUint::one() << key_bits;
    let key_id = key_fingerprint(KEY_TAG, &modulus);
    Ok(TransparentKey {
        modulus,
        key_bits,
        key_id,
    })
}

impl AdditiveScheme for Transparent {
    type PublicKey = TransparentKey;
    type SecretKey = TransparentKey;
    type Ciphertext = TransparentCiphertext;

    const NAME: &'static str = "debug";
    const SECURE: bool = false;

    fn keygen<R: Rng + ?Sized>(key_bits: u32, _rng: &mut R) -> Result<SchemeKeyPair<Self>> {
        let key = key_from_bits(key_bits)?;
        Ok(SchemeKeyPair {
            public: key.clone(),
            secret: key,
            key_bits,
        })
    }

    fn encrypt<R: Rng + ?Sized>(
        pk: &Self::PublicKey,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Self::Ciphertext> {
        if m >= &pk.modulus {
            return Err(Error::PlaintextOutOfRange {
                value: m.to_string(),
                modulus: pk.modulus.to_string(),
            });
        }
        Ok(TransparentCiphertext {
            sum: m.clone(),
            nonce: rng.gen_biguint(NONCE_BITS),
            key_id: pk.key_id,
        })
    }

    fn decrypt(sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Result<BigUint> {
        if ct.key_id != sk.key_id {
            return Err(Error::KeyMismatch);
        }
        Ok(&ct.sum % &sk.modulus)
    }

    fn add(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext> {
        if a.key_id != pk.key_id || b.key_id != pk.key_id {
            return Err(Error::KeyMismatch);
        }
        Ok(TransparentCiphertext {
            sum: (&a.sum + &b.sum) % &pk.modulus,
            nonce: &a.nonce + &b.nonce,
            key_id: pk.key_id,
        })
    }

    fn plaintext_modulus(pk: &Self::PublicKey) -> &BigUint {
        &pk.modulus
    }

    fn ciphertext_bytes(ct: &Self::Ciphertext) -> Vec<u8> {
        let sum = ct.sum.to_bytes_le();
        let nonce = ct.nonce.to_bytes_le();
        let mut out = Vec::with_capacity(8 + sum.len() + nonce.len());
        out.extend_from_slice(&(sum.len() as u64).to_le_bytes());
        out.extend_from_slice(&sum);
        out.extend_from_slice(&nonce);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn marked_insecure() {
        const { assert!(!Transparent::SECURE) }
        assert_eq!(Transparent::NAME, "debug");
    }

    #[test]
    fn roundtrip_and_wrapping_addition() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let pair = Transparent::keygen(16, &mut rng).unwrap();
        let a = BigUint::from(65_000u32);
        let b = BigUint::from(1_000u32);
        let ca = Transparent::encrypt(&pair.public, &a, &mut rng).unwrap();
        let cb = Transparent::encrypt(&pair.public, &b, &mut rng).unwrap();
        let sum = Transparent::add(&pair.public, &ca, &cb).unwrap();
        assert_eq!(
            Transparent::decrypt(&pair.secret, &sum).unwrap(),
            BigUint::from((65_000u32 + 1_000) % (1 << 16))
        );
    }

    #[test]
    fn repeat_encryptions_differ_in_bytes() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let pair = Transparent::keygen(32, &mut rng).unwrap();
        let m = BigUint::from(7u32);
        let a = Transparent::encrypt(&pair.public, &m, &mut rng).unwrap();
        let b = Transparent::encrypt(&pair.public, &m, &mut rng).unwrap();
        assert_ne!(
            Transparent::ciphertext_bytes(&a),
            Transparent::ciphertext_bytes(&b)
        );
    }

    #[test]
    fn rejects_out_of_range_plaintext() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let pair = Transparent::keygen(16, &mut rng).unwrap();
        let err = Transparent::encrypt(&pair.public, &(BigUint::one() << 16u32), &mut rng);
        assert!(matches!(err, Err(Error::PlaintextOutOfRange { .. })));
    }

    #[test]
    fn rejects_foreign_ciphertexts() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let a = Transparent::keygen(16, &mut rng).unwrap();
        let b = Transparent::keygen(32, &mut rng).unwrap();
        let ct = Transparent::encrypt(&a.public, &BigUint::one(), &mut rng).unwrap();
        assert!(matches!(
            Transparent::decrypt(&b.secret, &ct),
            Err(Error::KeyMismatch)
        ));
    }

    #[test]
    fn key_roundtrips_through_json() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let pair = Transparent::keygen(24, &mut rng).unwrap();
        let back: TransparentKey =
            serde_json::from_str(&serde_json::to_string(&pair.public).unwrap()).unwrap();
        assert_eq!(back.key_id(), pair.public.key_id());
    }
}
