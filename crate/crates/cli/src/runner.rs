//! Timed benchmark runs: direct vs cached encryption over a workload,
//! and cache construction across bit widths.

use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, ensure, Context as _};
use hecache::cache::AddCounts;
use hecache::tensor::{self, TensorCipher, TensorPlain};
use hecache::{AdditiveScheme, CacheParams, RadixCache, SchemeKeyPair};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::report::{
    reduction_percent, CacheBuildChecks, CacheBuildReport, CacheBuildRow, EncryptReport,
    RunContext, TimingStats,
};
use crate::workload::{synth_batch, WorkloadSpec};

/// Per-entry build times may wobble with allocator and cache effects;
/// beyond this factor the growth is treated as super-linear.
const LINEAR_SLACK: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub cache: CacheParams,
    pub key_bits: u32,
    pub repetitions: u32,
    pub seed: u64,
    pub parallel: bool,
}

impl BenchConfig {
    pub fn context<S: AdditiveScheme>(&self) -> RunContext {
        RunContext {
            scheme: S::NAME.to_string(),
            key_bits: self.key_bits,
            cache: self.cache,
            seed: self.seed,
            workers: worker_count(self.parallel),
            repetitions: self.repetitions,
        }
    }
}

pub fn time_seconds<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

#[cfg(feature = "parallel")]
fn worker_count(parallel: bool) -> usize {
    if parallel {
        rayon::current_num_threads()
    } else {
        1
    }
}

#[cfg(not(feature = "parallel"))]
fn worker_count(_parallel: bool) -> usize {
    1
}

pub fn ensure_parallel_available(parallel: bool) -> anyhow::Result<()> {
    if parallel && !cfg!(feature = "parallel") {
        bail!("this binary was built without the parallel feature");
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn cached_encrypt_dispatch<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
    parallel: bool,
) -> hecache::Result<(TensorCipher<S>, AddCounts)> {
    if parallel {
        tensor::encrypt_tensor_counted_par(cache, t, seed)
    } else {
        tensor::encrypt_tensor_counted(cache, t, seed)
    }
}

#[cfg(not(feature = "parallel"))]
fn cached_encrypt_dispatch<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    t: &TensorPlain,
    seed: u64,
    _parallel: bool,
) -> hecache::Result<(TensorCipher<S>, AddCounts)> {
    tensor::encrypt_tensor_counted(cache, t, seed)
}

#[cfg(feature = "parallel")]
fn direct_encrypt_dispatch<S: AdditiveScheme>(
    pk: &S::PublicKey,
    t: &TensorPlain,
    seed: u64,
    parallel: bool,
) -> hecache::Result<TensorCipher<S>> {
    if parallel {
        tensor::encrypt_tensor_direct_par::<S>(pk, t, seed)
    } else {
        tensor::encrypt_tensor_direct::<S>(pk, t, seed)
    }
}

#[cfg(not(feature = "parallel"))]
fn direct_encrypt_dispatch<S: AdditiveScheme>(
    pk: &S::PublicKey,
    t: &TensorPlain,
    seed: u64,
    _parallel: bool,
) -> hecache::Result<TensorCipher<S>> {
    tensor::encrypt_tensor_direct::<S>(pk, t, seed)
}

fn per_tensor_seed(base: u64, rep: u32, index: usize) -> u64 {
    // Distinct rng streams per (repetition, tensor); elements already get
    // their own stream within a tensor.
    base ^ (u64::from(rep) << 48) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One cached-encryption pass over the batch, returning its addition
/// counts.
pub fn cached_pass<S: AdditiveScheme>(
    cache: &RadixCache<S>,
    batch: &[TensorPlain],
    seed: u64,
    rep: u32,
    parallel: bool,
) -> anyhow::Result<AddCounts> {
    let mut counts = AddCounts::default();
    for (i, t) in batch.iter().enumerate() {
        let (ct, c) = cached_encrypt_dispatch(cache, t, per_tensor_seed(seed, rep, i), parallel)?;
        counts += c;
        black_box(ct);
    }
    Ok(counts)
}

/// One direct-encryption pass over the batch.
pub fn direct_pass<S: AdditiveScheme>(
    pk: &S::PublicKey,
    batch: &[TensorPlain],
    seed: u64,
    rep: u32,
    parallel: bool,
) -> anyhow::Result<()> {
    for (i, t) in batch.iter().enumerate() {
        let ct = direct_encrypt_dispatch::<S>(pk, t, per_tensor_seed(seed, rep, i), parallel)?;
        black_box(ct);
    }
    Ok(())
}

pub fn keygen_and_cache<S: AdditiveScheme>(
    cfg: &BenchConfig,
) -> anyhow::Result<(SchemeKeyPair<S>, RadixCache<S>, f64)> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let pair = S::keygen(cfg.key_bits, &mut rng).context("key generation")?;
    let (cache, build_seconds) = {
        let (res, secs) = time_seconds(|| RadixCache::<S>::build(&pair.public, cfg.cache, &mut rng));
        (res.context("cache build")?, secs)
    };
    Ok((pair, cache, build_seconds))
}

/// Times direct vs cached encryption of the workload batch, one warm-up
/// pass per path excluded from the statistics.
pub fn bench_encrypt<S: AdditiveScheme>(
    spec: &WorkloadSpec,
    cfg: &BenchConfig,
) -> anyhow::Result<EncryptReport> {
    ensure!(
        cfg.repetitions >= 3,
        "bench-encrypt needs at least 3 repetitions, got {}",
        cfg.repetitions
    );
    ensure_parallel_available(cfg.parallel)?;
    spec.validate()?;
    ensure!(
        spec.bit_width <= cfg.cache.bit_width,
        "workload bit width {} exceeds the cache bit width {}",
        spec.bit_width,
        cfg.cache.bit_width
    );

    let batch = synth_batch(spec)?;
    let elements: usize = batch.iter().map(|t| t.len()).sum();
    let nonempty: usize = batch.iter().map(|t| t.nonempty_count()).sum();
    let (pair, cache, build_seconds) = keygen_and_cache::<S>(cfg)?;

    // Warm-up, untimed.
    direct_pass::<S>(&pair.public, &batch, cfg.seed, u32::MAX, cfg.parallel)?;
    cached_pass(&cache, &batch, cfg.seed, u32::MAX - 1, cfg.parallel)?;

    let mut direct_raw = Vec::with_capacity(cfg.repetitions as usize);
    let mut cached_raw = Vec::with_capacity(cfg.repetitions as usize);
    let mut digit_join = None;
    let mut randomizer = 0;
    for rep in 0..cfg.repetitions {
        let (res, secs) =
            time_seconds(|| direct_pass::<S>(&pair.public, &batch, cfg.seed, rep, cfg.parallel));
        res?;
        direct_raw.push(secs);

        let (res, secs) =
            time_seconds(|| cached_pass(&cache, &batch, cfg.seed, rep, cfg.parallel));
        let counts = res?;
        cached_raw.push(secs);

        // The digit-driven additions depend only on the data, so every
        // repetition must agree.
        match digit_join {
            None => digit_join = Some(counts.digit_join),
            Some(expect) => assert_eq!(counts.digit_join, expect, "digit-join count drifted"),
        }
        randomizer = counts.randomizer;
    }

    let direct_encrypt = TimingStats::from_raw(direct_raw);
    let cached_encrypt = TimingStats::from_raw(cached_raw);
    let mut warnings = Vec::new();
    if direct_encrypt.near_timer_resolution() || cached_encrypt.near_timer_resolution() {
        warnings.push("timings are near timer resolution; use a larger workload".into());
    }
    if !S::SECURE {
        warnings.push("debug scheme timings do not reflect cryptographic cost".into());
    }

    Ok(EncryptReport {
        context: cfg.context::<S>(),
        workload: spec.name.clone(),
        elements_per_repetition: elements,
        nonempty_rate: nonempty as f64 / elements.max(1) as f64,
        reduction_percent: reduction_percent(
            direct_encrypt.mean_seconds,
            cached_encrypt.mean_seconds,
        ),
        cache_build: TimingStats::from_raw(vec![build_seconds]),
        direct_encrypt,
        cached_encrypt,
        digit_join_additions: digit_join.unwrap_or(0),
        randomizer_additions: randomizer,
        warnings,
    })
}

/// Everything needed to reuse a cache across runs: parameters, pool,
/// and the keypair it was built under. The secret key is included so a
/// later run can decrypt; treat bundle files as bench fixtures, not
/// deployable key material.
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
pub struct CacheBundle<S: AdditiveScheme> {
    pub scheme: String,
    pub key_bits: u32,
    pub keypair: SchemeKeyPair<S>,
    pub cache: RadixCache<S>,
    pub fingerprint: String,
}

pub fn build_cache_bundle<S: AdditiveScheme>(
    cfg: &BenchConfig,
) -> anyhow::Result<(CacheBundle<S>, f64)> {
    let (pair, cache, build_seconds) = keygen_and_cache::<S>(cfg)?;
    let fingerprint = cache.fingerprint();
    Ok((
        CacheBundle {
            scheme: S::NAME.to_string(),
            key_bits: cfg.key_bits,
            keypair: pair,
            cache,
            fingerprint,
        },
        build_seconds,
    ))
}

/// Times cache construction for each bit width and checks the growth
/// behavior: nondecreasing in the width, at most linear in the number
/// of entries.
pub fn bench_cache_build<S: AdditiveScheme>(
    bit_widths: &[u32],
    cfg: &BenchConfig,
) -> anyhow::Result<CacheBuildReport> {
    ensure!(!bit_widths.is_empty(), "need at least one bit width");
    ensure!(cfg.repetitions >= 1, "need at least one repetition");

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let pair = S::keygen(cfg.key_bits, &mut rng).context("key generation")?;

    let mut rows = Vec::with_capacity(bit_widths.len());
    for &bit_width in bit_widths {
        let params = CacheParams {
            bit_width,
            ..cfg.cache
        };
        let mut raw = Vec::with_capacity(cfg.repetitions as usize);
        let mut entries = 0;
        for _ in 0..cfg.repetitions {
            let (res, secs) =
                time_seconds(|| RadixCache::<S>::build(&pair.public, params, &mut rng));
            let cache = res.context("cache build")?;
            entries = cache.radix_entries().len() + cache.zero_entries().len();
            raw.push(secs);
        }
        let build = TimingStats::from_raw(raw);
        rows.push(CacheBuildRow {
            bit_width,
            entries,
            seconds_per_entry: build.mean_seconds / entries as f64,
            build,
        });
    }

    let mut by_width = rows.clone();
    by_width.sort_by_key(|r| r.bit_width);
    let nondecreasing = by_width
        .windows(2)
        .all(|w| w[1].build.mean_seconds >= w[0].build.mean_seconds);
    let per_entry: Vec<f64> = rows.iter().map(|r| r.seconds_per_entry).collect();
    let linear_growth = per_entry
        .iter()
        .fold(f64::MIN, |a, &b| a.max(b))
        <= per_entry.iter().fold(f64::MAX, |a, &b| a.min(b)) * LINEAR_SLACK;

    let mut warnings = Vec::new();
    if rows.iter().any(|r| r.build.near_timer_resolution()) {
        warnings.push("build timings are near timer resolution".into());
    }

    Ok(CacheBuildReport {
        context: cfg.context::<S>(),
        rows,
        checks: CacheBuildChecks {
            nondecreasing,
            linear_growth,
        },
        warnings,
    })
}
