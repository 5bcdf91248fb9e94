//! Paillier cryptosystem over `Z_n` with `g = n + 1`.
//!
//! Keygen picks distinct primes `p, q`, sets `n = pq`,
//! `lambda = lcm(p-1, q-1)`, `mu = lambda^-1 mod n`. Encryption of `m`
//! with randomizer `rho` is `(1 + m*n) * rho^n mod n^2`, using the
//! binomial identity `(n+1)^m = 1 + m*n (mod n^2)` to avoid one modpow.
//! Decryption computes `L(c^lambda mod n^2) * mu mod n` where
//! `L(u) = (u - 1) / n`. The product of two ciphertexts decrypts to the
//! sum of their plaintexts mod `n`, which is the only homomorphic
//! operation exposed here.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_prime::RandPrime;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{key_fingerprint, serde_uint, AdditiveScheme, SchemeKeyPair};
use crate::error::{Error, Result};

const MIN_KEY_BITS: u32 = 16;
const MAX_KEYGEN_ATTEMPTS: u32 = 64;
const MAX_RANDOMIZER_ATTEMPTS: u32 = 64;
const KEY_TAG: &str = "paillier";

/// Marker type implementing [`AdditiveScheme`] for Paillier.
#[derive(Debug, Clone, Copy)]
pub enum Paillier {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PublicRepr", into = "PublicRepr")]
pub struct PaillierPublicKey {
    n: BigUint,
    n_squared: BigUint,
    key_id: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SecretRepr", into = "SecretRepr")]
pub struct PaillierSecretKey {
    n: BigUint,
    n_squared: BigUint,
    lambda: BigUint,
    mu: BigUint,
    key_id: u64,
}

/// A value in `Z_{n^2}` tagged with the fingerprint of the key that
/// produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaillierCiphertext {
    #[serde(with = "serde_uint")]
    value: BigUint,
    key_id: u64,
}

impl PaillierPublicKey {
    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn key_id(&self) -> u64 {
        self.key_id
    }
}

impl PaillierSecretKey {
    pub fn key_id(&self) -> u64 {
        self.key_id
    }
}

impl PaillierCiphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key_id(&self) -> u64 {
        self.key_id
    }
}

/// Serialized form of the public key: just `n` as a decimal string.
/// `n^2` and the fingerprint are recomputed on load.
#[derive(Serialize, Deserialize)]
struct PublicRepr {
    #[serde(with = "serde_uint")]
    n: BigUint,
}

#[derive(Serialize, Deserialize)]
struct SecretRepr {
    #[serde(with = "serde_uint")]
    n: BigUint,
    #[serde(with = "serde_uint")]
    lambda: BigUint,
    #[serde(with = "serde_uint")]
    mu: BigUint,
}

impl From<PaillierPublicKey> for PublicRepr {
    fn from(pk: PaillierPublicKey) -> Self {
        PublicRepr { n: pk.n }
    }
}

impl TryFrom<PublicRepr> for PaillierPublicKey {
    type Error = Error;

    fn try_from(repr: PublicRepr) -> Result<Self> {
        if repr.n < BigUint::from(15u32) || repr.n.is_even() {
            return Err(Error::InvalidKey(
                "modulus must be an odd semiprime of at least 4 bits".into(),
            ));
        }
        Ok(public_key_from_n(repr.n))
    }
}

impl From<PaillierSecretKey> for SecretRepr {
    fn from(sk: PaillierSecretKey) -> Self {
        SecretRepr {
            n: sk.n,
            lambda: sk.lambda,
            mu: sk.mu,
        }
    }
}

impl TryFrom<SecretRepr> for PaillierSecretKey {
    type Error = Error;

    fn try_from(repr: SecretRepr) -> Result<Self> {
        if repr.n < BigUint::from(15u32) || repr.n.is_even() {
            return Err(Error::InvalidKey(
                "modulus must be an odd semiprime of at least 4 bits".into(),
            ));
        }
        if repr.lambda.is_zero() {
            return Err(Error::InvalidKey("lambda must be nonzero".into()));
        }
        if (&repr.mu * &repr.lambda) % &repr.n != BigUint::one() {
            return Err(Error::InvalidKey("mu is not the inverse of lambda".into()));
        }
        let n_squared = &repr.n * &repr.n;
        let key_id = key_fingerprint(KEY_TAG, &repr.n);
        Ok(PaillierSecretKey {
            n: repr.n,
            n_squared,
            lambda: repr.lambda,
            mu: repr.mu,
            key_id,
        })
    }
}

fn public_key_from_n(n: BigUint) -> PaillierPublicKey {
    let n_squared = &n * &n;
    let key_id = key_fingerprint(KEY_TAG, &n);
    PaillierPublicKey {
        n,
        n_squared,
        key_id,
    }
}

/// Builds a keypair from two given primes. Fails if the pair is unusable
/// (equal, even, composite, or `n` shares a factor with `phi(n)`).
pub fn from_primes(p: &BigUint, q: &BigUint) -> Result<SchemeKeyPair<Paillier>> {
    for prime in [p, q] {
        if !num_prime::nt_funcs::is_prime(prime, None).probably() {
            return Err(Error::InvalidKey(format!("{prime} is not prime")));
        }
    }
    keypair_from_parts(p, q)
}

fn keypair_from_parts(p: &BigUint, q: &BigUint) -> Result<SchemeKeyPair<Paillier>> {
    let three = BigUint::from(3u32);
    if p < &three || q < &three || p.is_even() || q.is_even() {
        return Err(Error::InvalidKey("primes must be odd and at least 3".into()));
    }
    if p == q {
        return Err(Error::InvalidKey("primes must be distinct".into()));
    }
    let n = p * q;
    let p1 = p - 1u32;
    let q1 = q - 1u32;
    if n.gcd(&(&p1 * &q1)) != BigUint::one() {
        return Err(Error::InvalidKey("n shares a factor with phi(n)".into()));
    }
    let lambda = p1.lcm(&q1);
    let mu = lambda
        .modinv(&n)
        .ok_or_else(|| Error::InvalidKey("lambda is not invertible mod n".into()))?;
    let key_bits = n.bits() as u32;
    let n_squared = &n * &n;
    let key_id = key_fingerprint(KEY_TAG, &n);
    Ok(SchemeKeyPair {
        public: PaillierPublicKey {
            n: n.clone(),
            n_squared: n_squared.clone(),
            key_id,
        },
        secret: PaillierSecretKey {
            n,
            n_squared,
            lambda,
            mu,
            key_id,
        },
        key_bits,
    })
}

impl AdditiveScheme for Paillier {
    type PublicKey = PaillierPublicKey;
    type SecretKey = PaillierSecretKey;
    type Ciphertext = PaillierCiphertext;

    const NAME: &'static str = "paillier";
    const SECURE: bool = true;

    fn keygen<R: Rng + ?Sized>(key_bits: u32, rng: &mut R) -> Result<SchemeKeyPair<Self>> {
        if key_bits < MIN_KEY_BITS {
            return Err(Error::KeyTooSmall {
                got: key_bits,
                min: MIN_KEY_BITS,
            });
        }
        let p_bits = key_bits.div_ceil(2) as usize;
        let q_bits = (key_bits / 2) as usize;
        for _ in 0..MAX_KEYGEN_ATTEMPTS {
            let p: BigUint = (&mut *rng).gen_prime_exact(p_bits, None);
            let q: BigUint = (&mut *rng).gen_prime_exact(q_bits, None);
            if let Ok(pair) = keypair_from_parts(&p, &q) {
                return Ok(pair);
            }
        }
        Err(Error::PrimeGeneration {
            attempts: MAX_KEYGEN_ATTEMPTS,
        })
    }

    fn encrypt<R: Rng + ?Sized>(
        pk: &Self::PublicKey,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Self::Ciphertext> {
        if m >= &pk.n {
            return Err(Error::PlaintextOutOfRange {
                value: m.to_string(),
                modulus: pk.n.to_string(),
            });
        }
        let rho = draw_randomizer(pk, rng)?;
        let gm = (BigUint::one() + m * &pk.n) % &pk.n_squared;
        let value = (gm * rho.modpow(&pk.n, &pk.n_squared)) % &pk.n_squared;
        Ok(PaillierCiphertext {
            value,
            key_id: pk.key_id,
        })
    }

    fn decrypt(sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Result<BigUint> {
        if ct.key_id != sk.key_id {
            return Err(Error::KeyMismatch);
        }
        if ct.value.is_zero() || ct.value >= sk.n_squared {
            return Err(Error::MalformedCiphertext(
                "value outside (0, n^2)".into(),
            ));
        }
        let u = ct.value.modpow(&sk.lambda, &sk.n_squared);
        if u.is_zero() {
            return Err(Error::MalformedCiphertext("value is not a unit".into()));
        }
        let shifted = u - 1u32;
        let (l, rem) = shifted.div_rem(&sk.n);
        if !rem.is_zero() {
            return Err(Error::MalformedCiphertext(
                "residue fails the decryption check".into(),
            ));
        }
        Ok((l * &sk.mu) % &sk.n)
    }

    fn add(
        pk: &Self::PublicKey,
        a: &Self::Ciphertext,
        b: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext> {
        if a.key_id != pk.key_id || b.key_id != pk.key_id {
            return Err(Error::KeyMismatch);
        }
        if a.value >= pk.n_squared || b.value >= pk.n_squared {
            return Err(Error::MalformedCiphertext(
                "value outside (0, n^2)".into(),
            ));
        }
        Ok(PaillierCiphertext {
            value: (&a.value * &b.value) % &pk.n_squared,
            key_id: pk.key_id,
        })
    }

    fn plaintext_modulus(pk: &Self::PublicKey) -> &BigUint {
        &pk.n
    }

    fn ciphertext_bytes(ct: &Self::Ciphertext) -> Vec<u8> {
        ct.value.to_bytes_le()
    }
}

fn draw_randomizer<R: Rng + ?Sized>(pk: &PaillierPublicKey, rng: &mut R) -> Result<BigUint> {
    for _ in 0..MAX_RANDOMIZER_ATTEMPTS {
        let rho = rng.gen_biguint_below(&pk.n);
        if !rho.is_zero() && rho.gcd(&pk.n).is_one() {
            return Ok(rho);
        }
    }
    // Non-units have density 1/p + 1/q, so this is unreachable for any
    // key that survived validation.
    Err(Error::InvalidKey(
        "could not find a unit randomizer mod n".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn toy_pair() -> SchemeKeyPair<Paillier> {
        from_primes(&BigUint::from(5u32), &BigUint::from(7u32)).unwrap()
    }

    #[test]
    fn toy_key_structure() {
        let pair = toy_pair();
        assert_eq!(pair.public.n, BigUint::from(35u32));
        assert_eq!(pair.secret.lambda, BigUint::from(12u32));
        assert_eq!(pair.secret.mu, BigUint::from(3u32));
        assert_eq!(pair.key_bits, 6);
        assert_eq!(pair.public.key_id, pair.secret.key_id);
    }

    #[test]
    fn toy_key_roundtrip_exhaustive() {
        let pair = toy_pair();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for m in 0u32..35 {
            let ct = Paillier::encrypt(&pair.public, &BigUint::from(m), &mut rng).unwrap();
            assert_eq!(
                Paillier::decrypt(&pair.secret, &ct).unwrap(),
                BigUint::from(m)
            );
        }
    }

    #[test]
    fn toy_key_addition_wraps_mod_n() {
        let pair = toy_pair();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for (a, b) in [(0u32, 0u32), (1, 2), (17, 17), (34, 34), (20, 15)] {
            let ca = Paillier::encrypt(&pair.public, &BigUint::from(a), &mut rng).unwrap();
            let cb = Paillier::encrypt(&pair.public, &BigUint::from(b), &mut rng).unwrap();
            let sum = Paillier::add(&pair.public, &ca, &cb).unwrap();
            assert_eq!(
                Paillier::decrypt(&pair.secret, &sum).unwrap(),
                BigUint::from((a + b) % 35)
            );
        }
    }

    #[test]
    fn generated_key_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let pair = Paillier::keygen(64, &mut rng).unwrap();
        assert!(pair.key_bits >= 63);
        for m in [0u64, 1, 255, 1 << 20] {
            let ct = Paillier::encrypt(&pair.public, &BigUint::from(m), &mut rng).unwrap();
            assert_eq!(
                Paillier::decrypt(&pair.secret, &ct).unwrap(),
                BigUint::from(m)
            );
        }
    }

    #[test]
    fn rejects_undersized_keygen() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        assert!(matches!(
            Paillier::keygen(8, &mut rng),
            Err(Error::KeyTooSmall { got: 8, min: 16 })
        ));
    }

    #[test]
    fn rejects_plaintext_at_modulus() {
        let pair = toy_pair();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let err = Paillier::encrypt(&pair.public, &BigUint::from(35u32), &mut rng).unwrap_err();
        assert!(matches!(err, Error::PlaintextOutOfRange { .. }));
    }

    #[test]
    fn rejects_cross_key_operations() {
        let a = toy_pair();
        let b = from_primes(&BigUint::from(11u32), &BigUint::from(13u32)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let ct_a = Paillier::encrypt(&a.public, &BigUint::from(3u32), &mut rng).unwrap();
        let ct_b = Paillier::encrypt(&b.public, &BigUint::from(4u32), &mut rng).unwrap();
        assert!(matches!(
            Paillier::decrypt(&b.secret, &ct_a),
            Err(Error::KeyMismatch)
        ));
        assert!(matches!(
            Paillier::add(&a.public, &ct_a, &ct_b),
            Err(Error::KeyMismatch)
        ));
    }

    #[test]
    fn rejects_bad_prime_inputs() {
        let p = BigUint::from(5u32);
        assert!(from_primes(&p, &p).is_err());
        assert!(from_primes(&p, &BigUint::from(9u32)).is_err());
        assert!(from_primes(&p, &BigUint::from(2u32)).is_err());
    }

    #[test]
    fn keys_and_ciphertexts_roundtrip_through_json() {
        let pair = toy_pair();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let ct = Paillier::encrypt(&pair.public, &BigUint::from(21u32), &mut rng).unwrap();

        let pk: PaillierPublicKey =
            serde_json::from_str(&serde_json::to_string(&pair.public).unwrap()).unwrap();
        let sk: PaillierSecretKey =
            serde_json::from_str(&serde_json::to_string(&pair.secret).unwrap()).unwrap();
        let ct2: PaillierCiphertext =
            serde_json::from_str(&serde_json::to_string(&ct).unwrap()).unwrap();

        assert_eq!(pk.n, pair.public.n);
        assert_eq!(pk.key_id, pair.public.key_id);
        assert_eq!(ct2, ct);
        assert_eq!(
            Paillier::decrypt(&sk, &ct2).unwrap(),
            BigUint::from(21u32)
        );
    }

    #[test]
    fn rejects_tampered_secret_key_json() {
        let json = r#"{"n":"35","lambda":"12","mu":"4"}"#;
        let got = serde_json::from_str::<PaillierSecretKey>(json);
        assert!(got.is_err());
    }

    #[test]
    fn rejects_malformed_ciphertexts() {
        let pair = toy_pair();
        let zero = PaillierCiphertext {
            value: BigUint::zero(),
            key_id: pair.secret.key_id,
        };
        assert!(matches!(
            Paillier::decrypt(&pair.secret, &zero),
            Err(Error::MalformedCiphertext(_))
        ));
        let oversized = PaillierCiphertext {
            value: BigUint::from(35u32 * 35),
            key_id: pair.secret.key_id,
        };
        assert!(matches!(
            Paillier::decrypt(&pair.secret, &oversized),
            Err(Error::MalformedCiphertext(_))
        ));
    }
}
