//! Element-wise tensor encryption on top of the radix cache.
//!
//! Floats are quantized to bounded unsigned integers, each element is
//! encrypted independently (via cache assembly or, for baseline
//! comparisons, primitive encryption), and ciphertext tensors of equal
//! shape can be summed homomorphically. With the signed-offset encoding
//! an aggregate of `k` tensors carries `k` offsets, which the caller
//! removes after decryption; as long as `k * (2^B - 1)` stays below the
//! key's plaintext modulus the aggregate is exact in quant units.
//!
//! Encryption randomness is drawn from one stream per element, keyed by
//! `(seed, element index)`, so sequential and parallel runs produce
//! byte-identical ciphertext tensors.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{AddCounts, RadixCache};
use crate::error::{Error, Result};
use crate::scheme::AdditiveScheme;

/// How float values map onto the unsigned quantization grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantMode {
    /// `q = round(v / scale)`, for nonnegative data.
    Unsigned,
    /// `q = round(v / scale) + 2^(B-1)`, shifting signed data into the
    /// unsigned range so homomorphic sums stay additive.
    SignedOffset,
}

/// Uniform quantizer onto `[0, 2^bit_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub scale: f64,
    pub bit_width: u32,
    pub mode: QuantMode,
    /// Zero point in quant units: `0` for unsigned, `2^(bit_width-1)`
    /// for signed-offset.
    pub offset: u64,
}

impl QuantParams {
    pub fn unsigned(bit_width: u32, scale: f64) -> Result<Self> {
        Self::validate(bit_width, scale)?;
        Ok(QuantParams {
            scale,
            bit_width,
            mode: QuantMode::Unsigned,
            offset: 0,
        })
    }

    pub fn signed_offset(bit_width: u32, scale: f64) -> Result<Self> {
        Self::validate(bit_width, scale)?;
        Ok(QuantParams {
            scale,
            bit_width,
            mode: QuantMode::SignedOffset,
            offset: 1u64 << (bit_width - 1),
        })
    }

    fn validate(bit_width: u32, scale: f64) -> Result<()> {
        if bit_width == 0 || bit_width > 63 {
            return Err(Error::BadQuantParams(format!(
                "bit width must be in [1, 63], got {bit_width}"
            )));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::BadQuantParams(format!(
                "scale must be finite and positive, got {scale}"
            )));
        }
        Ok(())
    }

    /// Largest quant value, `2^bit_width - 1`.
    pub fn q_max(&self) -> u64 {
        (1u64 << self.bit_width) - 1
    }

    /// Quantizes one finite value, clamping to the representable range.
    /// Rounds half away from zero.
    pub fn quantize_value(&self, v: f64) -> u64 {
        debug_assert!(v.is_finite());
        let q = (v / self.scale).round() as i128 + self.offset as i128;
        q.clamp(0, self.q_max() as i128) as u64
    }

    pub fn dequantize_value(&self, q: u64) -> f64 {
        (q as i128 - self.offset as i128) as f64 * self.scale
    }

    /// Recovers the float sum of `participants` values from the decrypted
    /// quant-unit sum by removing the accumulated offsets.
    pub fn dequantize_sum(&self, q_sum: u64, participants: usize) -> f64 {
        let corrected = q_sum as i128 - participants as i128 * self.offset as i128;
        corrected as f64 * self.scale
    }
}

/// Quantized tensor: flat row-major values with a shape.
///
/// Values of a freshly quantized tensor lie in `[0, 2^bit_width)`, but the
/// type also carries decrypted aggregates, whose entries can be up to
/// `participants` times larger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorPlain {
    pub shape: Vec<usize>,
    pub values: Vec<u64>,
    pub quant: QuantParams,
}

impl TensorPlain {
    pub fn new(shape: Vec<usize>, values: Vec<u64>, quant: QuantParams) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if expect != values.len() {
            return Err(Error::ShapeMismatch {
                shape,
                len: values.len(),
            });
        }
        Ok(TensorPlain {
            shape,
            values,
            quant,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of nonzero entries in quant units. With unsigned encoding
    /// this matches data sparsity; with signed-offset it does not, since
    /// a float zero lands on the offset, not on quant zero.
    pub fn nonempty_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn nonempty_rate(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.nonempty_count() as f64 / self.values.len() as f64
        }
    }
}

/// Quantizes a float tensor. Rejects non-finite entries and length
/// mismatches; out-of-range values clamp to the grid ends.
pub fn quantize(shape: &[usize], values: &[f64], quant: QuantParams) -> Result<TensorPlain> {
    let expect: usize = shape.iter().product();
    if expect != values.len() {
        return Err(Error::ShapeMismatch {
            shape: shape.to_vec(),
            len: values.len(),
        });
    }
    let mut out = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        out.push(quant.quantize_value(v));
    }
    TensorPlain::new(shape.to_vec(), out, quant)
}

pub fn dequantize(t: &TensorPlain) -> Vec<f64> {
    t.values
        .iter()
        .map(|&q| t.quant.dequantize_value(q))
        .collect()
}

/// Element-wise encrypted tensor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TensorCipher<S: AdditiveScheme> {
    pub shape: Vec<usize>,
    pub ciphertexts: Vec<S::Ciphertext>,
    pub quant: QuantParams,
}

fn element_rng(seed: u64, index: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn check_widths<S: AdditiveScheme>(cache: &RadixCache<S>, t: &TensorPlain) -> Result<()> {
    if t.quant.bit_width > cache.params().bit_width {
        return Err(Error::BitWidthMismatch {
            tensor: t.quant.bit_width,
            cache: cache.params().bit_width,
        });
    }
    Ok(())
}

/// Encrypts every element through cache assembly, sequentially.
pub fn encrypt_tensor<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
) -> Result<TensorCipher<S>> {
    encrypt_tensor_counted(cache, t, seed).map(|(tc, _)| tc)
}

/// Sequential cache encryption, also reporting total addition counts.
pub fn encrypt_tensor_counted<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
) -> Result<(TensorCipher<S>, AddCounts)> {
    check_widths(cache, t)?;
    let mut counts = AddCounts::default();
    let mut ciphertexts = Vec::with_capacity(t.len());
    for (i, &v) in t.values.iter().enumerate() {
        let mut rng = element_rng(seed, i);
        let (ct, c) = cache
            .encrypt_counted(u128::from(v), &mut rng)
            .map_err(|e| e.at_element(i))?;
        counts += c;
        ciphertexts.push(ct);
    }
    Ok((
        TensorCipher {
            shape: t.shape.clone(),
            ciphertexts,
            quant: t.quant,
        },
        counts,
    ))
}

/// Parallel cache encryption. Produces exactly the ciphertexts the
/// sequential path would, because randomness is keyed per element.
#[cfg(feature = "parallel")]
pub fn encrypt_tensor_par<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
) -> Result<TensorCipher<S>> {
    encrypt_tensor_counted_par(cache, t, seed).map(|(tc, _)| tc)
}

#[cfg(feature = "parallel")]
pub fn encrypt_tensor_counted_par<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
) -> Result<(TensorCipher<S>, AddCounts)> {
    check_widths(cache, t)?;
    let pairs: Vec<(S::Ciphertext, AddCounts)> = t
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut rng = element_rng(seed, i);
            cache
                .encrypt_counted(u128::from(v), &mut rng)
                .map_err(|e| e.at_element(i))
        })
        .collect::<Result<_>>()?;
    let mut counts = AddCounts::default();
    let mut ciphertexts = Vec::with_capacity(pairs.len());
    for (ct, c) in pairs {
        counts += c;
        ciphertexts.push(ct);
    }
    Ok((
        TensorCipher {
            shape: t.shape.clone(),
            ciphertexts,
            quant: t.quant,
        },
        counts,
    ))
}

/// Baseline: one primitive encryption per element, no cache involved.
pub fn encrypt_tensor_direct<S: AdditiveScheme>(
    pk: &S::PublicKey,
    t: &TensorPlain,
    seed: u64,
) -> Result<TensorCipher<S>> {
    let mut ciphertexts = Vec::with_capacity(t.len());
    for (i, &v) in t.values.iter().enumerate() {
        let mut rng = element_rng(seed, i);
        let ct = S::encrypt(pk, &BigUint::from(v), &mut rng).map_err(|e| e.at_element(i))?;
        ciphertexts.push(ct);
    }
    Ok(TensorCipher {
        shape: t.shape.clone(),
        ciphertexts,
        quant: t.quant,
    })
}

#[cfg(feature = "parallel")]
pub fn encrypt_tensor_direct_par<S: AdditiveScheme>(
    pk: &S::PublicKey,
    t: &TensorPlain,
    seed: u64,
) -> Result<TensorCipher<S>> {
    let ciphertexts: Vec<S::Ciphertext> = t
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut rng = element_rng(seed, i);
            S::encrypt(pk, &BigUint::from(v), &mut rng).map_err(|e| e.at_element(i))
        })
        .collect::<Result<_>>()?;
    Ok(TensorCipher {
        shape: t.shape.clone(),
        ciphertexts,
        quant: t.quant,
    })
}

/// Decrypts element-wise. Values must fit in 64 bits, which holds for
/// any aggregate the capacity check admits.
pub fn decrypt_tensor<S: AdditiveScheme>(
    sk: &S::SecretKey,
    tc: &TensorCipher<S>,
) -> Result<TensorPlain> {
    let mut values = Vec::with_capacity(tc.ciphertexts.len());
    for (i, ct) in tc.ciphertexts.iter().enumerate() {
        let m = S::decrypt(sk, ct).map_err(|e| e.at_element(i))?;
        let v = m.to_u64().ok_or_else(|| {
            Error::TensorMismatch("decrypted value exceeds the 64-bit tensor range".into())
                .at_element(i)
        })?;
        values.push(v);
    }
    TensorPlain::new(tc.shape.clone(), values, tc.quant)
}

fn check_compatible<S: AdditiveScheme>(
    first: &TensorCipher<S>,
    other: &TensorCipher<S>,
) -> Result<()> {
    if first.shape != other.shape {
        return Err(Error::TensorMismatch(format!(
            "shapes {:?} and {:?} differ",
            first.shape, other.shape
        )));
    }
    if first.quant != other.quant {
        return Err(Error::TensorMismatch(
            "quantization parameters differ".into(),
        ));
    }
    Ok(())
}

/// Element-wise homomorphic sum of equally shaped, equally quantized
/// ciphertext tensors.
pub fn aggregate<S: AdditiveScheme>(
    pk: &S::PublicKey,
    parts: &[TensorCipher<S>],
) -> Result<TensorCipher<S>> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::TensorMismatch("nothing to aggregate".into()))?;
    let mut acc = first.ciphertexts.clone();
    for part in rest {
        check_compatible(first, part)?;
        for (i, (a, b)) in acc.iter_mut().zip(part.ciphertexts.iter()).enumerate() {
            *a = S::add(pk, a, b).map_err(|e| e.at_element(i))?;
        }
    }
    Ok(TensorCipher {
        shape: first.shape.clone(),
        ciphertexts: acc,
        quant: first.quant,
    })
}

/// Plaintext-side oracle for [`aggregate`]: element-wise sum in quant
/// units, with the same shape and quant checks.
pub fn sum_plain(parts: &[TensorPlain]) -> Result<TensorPlain> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::TensorMismatch("nothing to aggregate".into()))?;
    let mut values = first.values.clone();
    for part in rest {
        if part.shape != first.shape || part.quant != first.quant {
            return Err(Error::TensorMismatch(
                "aggregation parts disagree on shape or quantization".into(),
            ));
        }
        for (a, &b) in values.iter_mut().zip(part.values.iter()) {
            *a = a.checked_add(b).ok_or_else(|| {
                Error::TensorMismatch("plaintext aggregate overflows 64 bits".into())
            })?;
        }
    }
    TensorPlain::new(first.shape.clone(), values, first.quant)
}

/// Removes `participants` offsets from every element of a decrypted
/// aggregate and maps back to floats.
pub fn dequantize_aggregate(t: &TensorPlain, participants: usize) -> Vec<f64> {
    t.values
        .iter()
        .map(|&q| t.quant.dequantize_sum(q, participants))
        .collect()
}

/// Most participants whose per-element sums are guaranteed not to wrap
/// the plaintext modulus: `floor((M - 1) / (2^bit_width - 1))`.
pub fn aggregation_capacity(modulus: &BigUint, quant: &QuantParams) -> u64 {
    let m1 = modulus - 1u32;
    (m1 / BigUint::from(quant.q_max()))
        .to_u64()
        .unwrap_or(u64::MAX)
}

/// Errors out unless `participants` tensors can aggregate without wrap.
pub fn check_aggregation_fits(
    modulus: &BigUint,
    quant: &QuantParams,
    participants: usize,
) -> Result<()> {
    let cap = aggregation_capacity(modulus, quant);
    if participants as u64 > cap {
        return Err(Error::Capacity(format!(
            "{participants} participants at {} bits can wrap the modulus; at most {cap} fit",
            quant.bit_width
        )));
    }
    Ok(())
}
