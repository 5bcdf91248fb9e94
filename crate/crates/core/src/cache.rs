//! Ciphertext assembly from a pre-encrypted pool.
//!
//! Encrypting under Paillier costs a modular exponentiation per value.
//! For bounded plaintexts that cost can be paid once up front: encrypt
//! every radix power `r^0 .. r^k` covering the plaintext range, plus a
//! pool of encryptions of zero, and later build the ciphertext for `x`
//! by homomorphically adding the power `r^i` ciphertext `d_i` times for
//! each radix digit `d_i` of `x`. A random subset of the zero pool is
//! folded in so that two encryptions of the same value do not produce
//! the same ciphertext. Every assembled ciphertext decrypts to exactly
//! `x`; only the cost and the randomizer structure change.
//!
//! The pool is immutable after construction: assembly takes `&self` and
//! hands out fresh ciphertexts without touching the entries.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scheme::AdditiveScheme;

/// Shape of a cache: which radix to decompose in, how wide the plaintext
/// range is, and how the zero pool is sized and sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheParams {
    /// Decomposition radix, at least 2.
    pub radix: u32,
    /// Plaintexts cover `[0, 2^bit_width)`; between 1 and 128.
    pub bit_width: u32,
    /// Number of zero ciphertexts kept for randomization, at least 1.
    pub zero_pool: usize,
    /// Lower bound on how many zero entries each assembly folds in.
    /// At least 1, so even `x = 0` yields a usable ciphertext.
    pub min_zero_inclusions: usize,
}

impl Default for CacheParams {
    fn default() -> Self {
        CacheParams {
            radix: 2,
            bit_width: 16,
            zero_pool: 64,
            min_zero_inclusions: 1,
        }
    }
}

impl CacheParams {
    /// Largest encodable plaintext, `2^bit_width - 1`.
    pub fn max_plain(&self) -> u128 {
        if self.bit_width >= 128 {
            u128::MAX
        } else {
            (1u128 << self.bit_width) - 1
        }
    }

    fn validate(&self) -> Result<()> {
        if self.radix < 2 {
            return Err(Error::BadCacheConfig(format!(
                "radix must be at least 2, got {}",
                self.radix
            )));
        }
        if self.bit_width == 0 || self.bit_width > 128 {
            return Err(Error::BadCacheConfig(format!(
                "bit width must be in [1, 128], got {}",
                self.bit_width
            )));
        }
        if self.zero_pool == 0 {
            return Err(Error::BadCacheConfig("zero pool must be nonempty".into()));
        }
        if self.min_zero_inclusions == 0 || self.min_zero_inclusions > self.zero_pool {
            return Err(Error::BadCacheConfig(format!(
                "min zero inclusions must be in [1, {}], got {}",
                self.zero_pool, self.min_zero_inclusions
            )));
        }
        Ok(())
    }
}

/// Little-endian radix digits: `digits[i]` multiplies `radix^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadixDigits {
    pub radix: u32,
    pub digits: Vec<u32>,
}

impl RadixDigits {
    /// Sum of the digits; the number of pool entries an assembly of this
    /// value joins, counting the zero-pool draws separately.
    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| u64::from(d)).sum()
    }

    /// Recomposes the original value.
    pub fn reconstruct(&self) -> u128 {
        let r = u128::from(self.radix);
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * r + u128::from(d))
    }
}

/// Largest value expressible with digits `0..=top_index`, saturating at
/// the type limit when `r^(top_index+1)` overflows.
fn span_max(radix: u32, top_index: u32) -> u128 {
    let r = u128::from(radix);
    let mut acc: u128 = 1;
    for _ in 0..=top_index {
        match acc.checked_mul(r) {
            Some(next) => acc = next,
            None => return u128::MAX,
        }
    }
    acc - 1
}

/// Largest `k` with `radix^k <= m`. Requires `m >= 1`.
pub(crate) fn floor_log(radix: u32, m: u128) -> u32 {
    debug_assert!(radix >= 2 && m >= 1);
    let r = u128::from(radix);
    let mut acc: u128 = 1;
    let mut k = 0;
    while let Some(next) = acc.checked_mul(r) {
        if next > m {
            break;
        }
        acc = next;
        k += 1;
    }
    k
}

/// Little-endian digits of `x` in the given radix, padded with zeros to
/// exactly `top_index + 1` positions. Fails if `x` needs more positions.
pub fn digits(x: u128, radix: u32, top_index: u32) -> Result<RadixDigits> {
    assert!(radix >= 2, "radix must be at least 2");
    let max = span_max(radix, top_index);
    if x > max {
        return Err(Error::OutOfRange { value: x, max });
    }
    let r = u128::from(radix);
    let mut digits = Vec::with_capacity(top_index as usize + 1);
    let mut rem = x;
    for _ in 0..=top_index {
        digits.push((rem % r) as u32);
        rem /= r;
    }
    debug_assert_eq!(rem, 0);
    Ok(RadixDigits { radix, digits })
}

/// Homomorphic additions needed to assemble `x` from cached radix powers,
/// not counting zero-pool randomization: the digit sum minus one, since
/// the first term seeds the accumulator. Zero for `x = 0`.
pub fn addition_count(x: u128, radix: u32, top_index: u32) -> Result<u64> {
    let sum = digits(x, radix, top_index)?.digit_sum();
    Ok(sum.saturating_sub(1))
}

/// Which zero-pool entries one assembly folds in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroMask {
    pub included: Vec<bool>,
    pub count: usize,
}

/// Addition counts from one or more assemblies, split by purpose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddCounts {
    /// Additions joining radix-power entries (the digit-driven cost).
    pub digit_join: u64,
    /// Additions folding in zero-pool entries (the randomization cost).
    pub randomizer: u64,
}

impl AddCounts {
    pub fn total(&self) -> u64 {
        self.digit_join + self.randomizer
    }
}

impl std::ops::AddAssign for AddCounts {
    fn add_assign(&mut self, rhs: AddCounts) {
        self.digit_join += rhs.digit_join;
        self.randomizer += rhs.randomizer;
    }
}

/// Immutable pool of pre-encrypted radix powers and zeros under one key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RadixCache<S: AdditiveScheme> {
    params: CacheParams,
    public_key: S::PublicKey,
    radix_entries: Vec<S::Ciphertext>,
    zero_entries: Vec<S::Ciphertext>,
}

impl<S: AdditiveScheme> RadixCache<S> {
    /// Encrypts `radix^0 .. radix^k` for `k = floor(log_radix(max_plain))`
    /// and `zero_pool` encryptions of zero. This is the expensive step;
    /// everything afterwards is additions only.
    pub fn build<R: Rng + ?Sized>(
        public_key: &S::PublicKey,
        params: CacheParams,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        let max_plain = params.max_plain();
        let modulus = S::plaintext_modulus(public_key);
        if BigUint::from(max_plain) >= *modulus {
            return Err(Error::Capacity(format!(
                "plaintext bound 2^{} - 1 does not fit the {}-bit key modulus",
                params.bit_width,
                modulus.bits()
            )));
        }
        let top = floor_log(params.radix, max_plain);
        let r = u128::from(params.radix);
        let mut radix_entries = Vec::with_capacity(top as usize + 1);
        let mut power: u128 = 1;
        for i in 0..=top {
            radix_entries.push(S::encrypt(public_key, &BigUint::from(power), rng)?);
            if i < top {
                power *= r;
            }
        }
        let zero = BigUint::default();
        let mut zero_entries = Vec::with_capacity(params.zero_pool);
        for _ in 0..params.zero_pool {
            zero_entries.push(S::encrypt(public_key, &zero, rng)?);
        }
        Ok(RadixCache {
            params,
            public_key: public_key.clone(),
            radix_entries,
            zero_entries,
        })
    }

    pub fn params(&self) -> &CacheParams {
        &self.params
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.public_key
    }

    /// Index of the highest cached power, `floor(log_radix(max_plain))`.
    pub fn top_index(&self) -> u32 {
        (self.radix_entries.len() - 1) as u32
    }

    pub fn radix_entries(&self) -> &[S::Ciphertext] {
        &self.radix_entries
    }

    pub fn zero_entries(&self) -> &[S::Ciphertext] {
        &self.zero_entries
    }

    pub fn max_plain(&self) -> u128 {
        self.params.max_plain()
    }

    /// Assembles a ciphertext for `x` by homomorphic addition over the
    /// pool. No primitive encryption happens here.
    pub fn encrypt<R: Rng + ?Sized>(&self, x: u128, rng: &mut R) -> Result<S::Ciphertext> {
        self.encrypt_counted(x, rng).map(|(ct, _)| ct)
    }

    /// Same as [`encrypt`](Self::encrypt), also reporting how many
    /// additions the assembly used.
    pub fn encrypt_counted<R: Rng + ?Sized>(
        &self,
        x: u128,
        rng: &mut R,
    ) -> Result<(S::Ciphertext, AddCounts)> {
        if x > self.max_plain() {
            return Err(Error::OutOfRange {
                value: x,
                max: self.max_plain(),
            });
        }
        let ds = digits(x, self.params.radix, self.top_index())?;
        let mut counts = AddCounts::default();
        let mut acc: Option<S::Ciphertext> = None;
        for (i, &d) in ds.digits.iter().enumerate() {
            for _ in 0..d {
                acc = Some(match acc {
                    None => self.radix_entries[i].clone(),
                    Some(prev) => {
                        counts.digit_join += 1;
                        S::add(&self.public_key, &prev, &self.radix_entries[i])?
                    }
                });
            }
        }
        let mask = self.draw_zero_mask(rng);
        for (j, included) in mask.included.iter().enumerate() {
            if !included {
                continue;
            }
            acc = Some(match acc {
                None => self.zero_entries[j].clone(),
                Some(prev) => {
                    counts.randomizer += 1;
                    S::add(&self.public_key, &prev, &self.zero_entries[j])?
                }
            });
        }
        let ct = acc.expect("mask includes at least one entry");
        Ok((ct, counts))
    }

    /// Independent coin flip per zero-pool entry, then topped up with
    /// uniformly chosen extra entries if fewer than `min_zero_inclusions`
    /// came up heads.
    pub fn draw_zero_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> ZeroMask {
        let pool = self.params.zero_pool;
        let mut included = vec![false; pool];
        let mut count = 0;
        for slot in included.iter_mut() {
            if rng.gen_bool(0.5) {
                *slot = true;
                count += 1;
            }
        }
        if count < self.params.min_zero_inclusions {
            let missing: Vec<usize> = (0..pool).filter(|&j| !included[j]).collect();
            let need = self.params.min_zero_inclusions - count;
            for pick in rand::seq::index::sample(rng, missing.len(), need) {
                included[missing[pick]] = true;
                count += 1;
            }
        }
        ZeroMask { included, count }
    }

    /// SHA-256 over the parameters and every pool entry, hex encoded.
    /// Two calls on an untouched cache return the same string, so this
    /// doubles as an immutability check around bulk encryption.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.params.radix.to_le_bytes());
        h.update(self.params.bit_width.to_le_bytes());
        h.update((self.params.zero_pool as u64).to_le_bytes());
        h.update((self.params.min_zero_inclusions as u64).to_le_bytes());
        for entry in self.radix_entries.iter().chain(self.zero_entries.iter()) {
            let bytes = S::ciphertext_bytes(entry);
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
