//! Desk-scale federated aggregation round.
//!
//! A configurable fraction of the clients participates. Each participant
//! holds a seeded synthetic weight vector, quantizes it with the
//! signed-offset encoding, and encrypts it twice (direct and cached) so
//! the two latencies can be compared on identical data. The
//! participants' ciphertext tensors are summed homomorphically, the sum
//! is decrypted, the accumulated offsets are removed, and the result is
//! checked for exact equality against the plaintext quantized sum.

use anyhow::{bail, ensure, Context as _};
use hecache::tensor::{self, QuantParams, TensorPlain};
use hecache::AdditiveScheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::report::{reduction_percent, FlReport, TimingStats};
use crate::runner::{
    cached_pass, direct_pass, ensure_parallel_available, keygen_and_cache, time_seconds,
    BenchConfig,
};

/// Carried through to reports only; at desk scale there is no training,
/// so the data split cannot influence encryption latency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionTag {
    Iid,
    NonIid,
}

impl std::fmt::Display for DistributionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistributionTag::Iid => write!(f, "iid"),
            DistributionTag::NonIid => write!(f, "non-iid"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlRoundSpec {
    pub client_count: usize,
    /// Fraction of clients taking part in this round, in `(0, 1]`.
    pub fraction: f64,
    /// Flat weight count per client.
    pub model_size: usize,
    pub distribution: DistributionTag,
    pub seed: u64,
}

impl FlRoundSpec {
    pub fn participants(&self) -> usize {
        (self.client_count as f64 * self.fraction).round() as usize
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.client_count >= 1, "need at least one client");
        ensure!(
            self.fraction > 0.0 && self.fraction <= 1.0,
            "fraction must lie in (0, 1], got {}",
            self.fraction
        );
        ensure!(self.model_size >= 1, "model size must be positive");
        ensure!(
            self.participants() >= 1,
            "round({} clients x {}) selects no participants",
            self.client_count,
            self.fraction
        );
        Ok(())
    }
}

/// Seeded synthetic weights, uniform in [-1, 1), one stream per client.
fn client_weights(spec: &FlRoundSpec, client: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(0x4657 + client as u64);
    (0..spec.model_size).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn fl_round<S: AdditiveScheme>(
    spec: &FlRoundSpec,
    cfg: &BenchConfig,
) -> anyhow::Result<FlReport> {
    spec.validate()?;
    ensure_parallel_available(cfg.parallel)?;
    ensure!(cfg.repetitions >= 1, "need at least one repetition");
    let participants = spec.participants();

    let bit_width = cfg.cache.bit_width;
    // Scale so the grid covers [-2, 2], twice the weight range.
    let quant = QuantParams::signed_offset(bit_width, 4.0 / (1u64 << bit_width) as f64)?;

    let (pair, cache, build_seconds) = keygen_and_cache::<S>(cfg)?;
    if let Err(e) =
        tensor::check_aggregation_fits(S::plaintext_modulus(&pair.public), &quant, participants)
    {
        bail!("aggregation would wrap the plaintext modulus: {e}");
    }

    let tensors: Vec<TensorPlain> = (0..participants)
        .map(|c| {
            let weights = client_weights(spec, c);
            tensor::quantize(&[spec.model_size], &weights, quant).context("quantize weights")
        })
        .collect::<anyhow::Result<_>>()?;

    // Warm-up, untimed.
    direct_pass::<S>(&pair.public, &tensors, cfg.seed, u32::MAX, cfg.parallel)?;
    cached_pass(&cache, &tensors, cfg.seed, u32::MAX - 1, cfg.parallel)?;

    let mut direct_raw = Vec::with_capacity(cfg.repetitions as usize);
    let mut cached_raw = Vec::with_capacity(cfg.repetitions as usize);
    let mut digit_join = 0;
    let mut randomizer = 0;
    for rep in 0..cfg.repetitions {
        let (res, secs) =
            time_seconds(|| direct_pass::<S>(&pair.public, &tensors, cfg.seed, rep, cfg.parallel));
        res?;
        direct_raw.push(secs);

        let (res, secs) = time_seconds(|| cached_pass(&cache, &tensors, cfg.seed, rep, cfg.parallel));
        let counts = res?;
        cached_raw.push(secs);
        digit_join = counts.digit_join;
        randomizer = counts.randomizer;
    }

    // The round itself: encrypt every participant once more (cached),
    // aggregate, decrypt, and verify against the plaintext oracle.
    let encrypted: Vec<_> = tensors
        .iter()
        .enumerate()
        .map(|(c, t)| tensor::encrypt_tensor(&cache, t, cfg.seed ^ ((c as u64 + 1) << 20)))
        .collect::<hecache::Result<_>>()?;
    let (agg, aggregate_seconds) = {
        let (res, secs) = time_seconds(|| tensor::aggregate(&pair.public, &encrypted));
        (res.context("aggregate")?, secs)
    };
    let decrypted = tensor::decrypt_tensor(&pair.secret, &agg).context("decrypt aggregate")?;
    let plain = tensor::sum_plain(&tensors).context("plaintext aggregate")?;
    let exact_aggregate = decrypted.values == plain.values;

    let direct_encrypt = TimingStats::from_raw(direct_raw);
    let cached_encrypt = TimingStats::from_raw(cached_raw);
    let mut warnings = Vec::new();
    if direct_encrypt.near_timer_resolution() || cached_encrypt.near_timer_resolution() {
        warnings.push("timings are near timer resolution; use a larger model".into());
    }
    if !S::SECURE {
        warnings.push("debug scheme timings do not reflect cryptographic cost".into());
    }

    Ok(FlReport {
        context: cfg.context::<S>(),
        client_count: spec.client_count,
        fraction: spec.fraction,
        participants,
        model_size: spec.model_size,
        distribution: spec.distribution.to_string(),
        quant_bit_width: bit_width,
        reduction_percent: reduction_percent(
            direct_encrypt.mean_seconds,
            cached_encrypt.mean_seconds,
        ),
        cache_build: TimingStats::from_raw(vec![build_seconds]),
        direct_encrypt,
        cached_encrypt,
        aggregate_seconds,
        exact_aggregate,
        digit_join_additions: digit_join,
        randomizer_additions: randomizer,
        warnings,
    })
}
