//! One-shot invariant runner: the exhaustive roundtrip, structural
//! oracle, parametrization, and randomization suites behind the
//! `verify` subcommand. Each check records a failure instead of
//! panicking so a broken build enumerates everything that is wrong.

use std::collections::HashSet;

use hecache::cost::{derivative_factor, measured_cost, monotonicity_check, optimal_radix};
use hecache::scheme::paillier::{self, Paillier};
use hecache::{addition_count, digits, AdditiveScheme, CacheParams, RadixCache, Transparent};
use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Roundtrip,
    Oracle,
    Parametrization,
    Randomness,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker {
    checks: u64,
    failures: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn into_report(self, suite: &'static str) -> SuiteReport {
        SuiteReport {
            suite,
            checks: self.checks,
            failures: self.failures,
        }
    }
}

fn toy_paillier() -> hecache::SchemeKeyPair<Paillier> {
    paillier::from_primes(&BigUint::from(251u32), &BigUint::from(257u32))
        .expect("251 and 257 are usable primes")
}

/// Every plaintext in range decrypts back from an assembled ciphertext:
/// the debug scheme covers [0, 2^12) for radixes 2, 3, 10, and toy-key
/// Paillier covers [0, 2^8).
pub fn roundtrip_suite(seed: u64) -> SuiteReport {
    let mut c = Checker::new();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let pair = Transparent::keygen(32, &mut rng).expect("debug keygen");
    for radix in [2u32, 3, 10] {
        let cache = RadixCache::<Transparent>::build(
            &pair.public,
            CacheParams {
                radix,
                bit_width: 12,
                zero_pool: 8,
                min_zero_inclusions: 1,
            },
            &mut rng,
        )
        .expect("debug cache build");
        for x in 0u128..(1 << 12) {
            let got = cache
                .encrypt(x, &mut rng)
                .and_then(|ct| Transparent::decrypt(&pair.secret, &ct));
            c.check(got.as_ref().ok() == Some(&BigUint::from(x)), || {
                format!("debug roundtrip failed at radix {radix}, x {x}: {got:?}")
            });
        }
    }

    let pair = toy_paillier();
    let cache = RadixCache::<Paillier>::build(
        &pair.public,
        CacheParams {
            radix: 2,
            bit_width: 8,
            zero_pool: 8,
            min_zero_inclusions: 1,
        },
        &mut rng,
    )
    .expect("toy cache build");
    for x in 0u128..(1 << 8) {
        let got = cache
            .encrypt(x, &mut rng)
            .and_then(|ct| Paillier::decrypt(&pair.secret, &ct));
        c.check(got.as_ref().ok() == Some(&BigUint::from(x)), || {
            format!("toy-key roundtrip failed at x {x}: {got:?}")
        });
    }

    c.into_report("roundtrip")
}

/// Structural checks that bypass the assembly loop: digits against
/// num-bigint's radix rendering, assembled Paillier ciphertexts against
/// the recomputed entry product, and reported addition counts against
/// the digit-sum model.
pub fn oracle_suite(seed: u64) -> SuiteReport {
    let mut c = Checker::new();

    for &x in &[0u128, 1, 7, 13, 100, 255, 4095, 65535, (1 << 40) + 3] {
        for radix in [2u32, 3, 10, 16] {
            let rendered = BigUint::from(x).to_str_radix(radix);
            let mut want: Vec<u32> = rendered
                .chars()
                .rev()
                .map(|ch| ch.to_digit(radix).expect("digit"))
                .collect();
            let top = want.len() as u32 + 2;
            want.resize(top as usize + 1, 0);
            let got = digits(x, radix, top).map(|d| d.digits);
            c.check(got.as_ref().ok() == Some(&want), || {
                format!("digits({x}, {radix}) disagree with the radix rendering: {got:?}")
            });
        }
    }

    let pair = toy_paillier();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = CacheParams {
        radix: 3,
        bit_width: 8,
        zero_pool: 8,
        min_zero_inclusions: 1,
    };
    let cache =
        RadixCache::<Paillier>::build(&pair.public, params, &mut rng).expect("cache build");
    let n_squared = pair.public.modulus() * pair.public.modulus();
    for x in [0u128, 1, 5, 42, 128, 201, 255] {
        let mut replay = rng.clone();
        let ct = cache.encrypt(x, &mut rng).expect("assembly");
        let ds = digits(x, params.radix, cache.top_index()).expect("digits");
        let mask = cache.draw_zero_mask(&mut replay);
        let mut product = BigUint::one();
        for (i, &d) in ds.digits.iter().enumerate() {
            let entry = cache.radix_entries()[i].value();
            product = product * entry.modpow(&BigUint::from(d), &n_squared) % &n_squared;
        }
        for (j, &included) in mask.included.iter().enumerate() {
            if included {
                product = product * cache.zero_entries()[j].value() % &n_squared;
            }
        }
        c.check(*ct.value() == product, || {
            format!("assembled ciphertext for {x} is not the entry product")
        });
    }

    for x in [0u128, 1, 13, 77, 255] {
        let (_, counts) = cache.encrypt_counted(x, &mut rng).expect("assembly");
        let want = addition_count(x, params.radix, cache.top_index()).expect("count");
        c.check(counts.digit_join == want, || {
            format!(
                "digit-join count for {x}: reported {}, model says {want}",
                counts.digit_join
            )
        });
    }

    c.into_report("oracle")
}

/// The cost formula against brute force, optimality of radix 2, and the
/// model's monotonicity in the radix.
pub fn parametrization_suite() -> SuiteReport {
    let mut c = Checker::new();

    for r in 2u32..=16 {
        for k in 1u32..=5 {
            let m = u128::from(r).pow(k + 1) - 1;
            let want = u64::from(r - 1) * u64::from(k + 1) - 1;
            let got = measured_cost(r, m);
            c.check(got.as_ref().ok() == Some(&want), || {
                format!("measured_cost({r}, {r}^{}−1) = {got:?}, expected {want}", k + 1)
            });
        }
    }

    for m in [3u128, 15, 255, 4095, 65535] {
        let got = optimal_radix(m, 2..=64);
        c.check(got == 2, || {
            format!("optimal_radix({m}) picked {got}, expected 2")
        });
        c.check(monotonicity_check(m, 64), || {
            format!("predicted cost is not monotone over [2, 64] for m = {m}")
        });
    }

    for r in 2..=64u32 {
        c.check(derivative_factor(f64::from(r)) > 0.0, || {
            format!("derivative factor is not positive at r = {r}")
        });
    }

    c.into_report("parametrization")
}

/// Probabilistic-encryption behavior of the cached path: repeat
/// encryptions are pairwise distinct and the zero mask is unbiased.
/// Distinctness needs a realistically sized group (under a toy key the
/// randomizer subgroup is small enough to birthday-collide), so this
/// suite generates a 256-bit key.
pub fn randomness_suite(seed: u64) -> SuiteReport {
    let mut c = Checker::new();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pair = Paillier::keygen(256, &mut rng).expect("keygen");
    let cache = RadixCache::<Paillier>::build(
        &pair.public,
        CacheParams {
            radix: 2,
            bit_width: 8,
            zero_pool: 128,
            min_zero_inclusions: 1,
        },
        &mut rng,
    )
    .expect("cache build");

    let mut seen = HashSet::new();
    for _ in 0..1000 {
        let ct = cache.encrypt(201, &mut rng).expect("assembly");
        seen.insert(Paillier::ciphertext_bytes(&ct));
    }
    c.check(seen.len() == 1000, || {
        format!(
            "only {} distinct ciphertexts out of 1000 assemblies of one plaintext",
            seen.len()
        )
    });

    let draws = 10_000u32;
    let mut per_index = vec![0u32; 128];
    for _ in 0..draws {
        let mask = cache.draw_zero_mask(&mut rng);
        c.check(mask.count >= 1, || "mask below the inclusion floor".into());
        for (j, &included) in mask.included.iter().enumerate() {
            if included {
                per_index[j] += 1;
            }
        }
    }
    for (j, &count) in per_index.iter().enumerate() {
        let freq = f64::from(count) / f64::from(draws);
        c.check((0.45..=0.55).contains(&freq), || {
            format!("zero entry {j} included with frequency {freq:.4}, outside [0.45, 0.55]")
        });
    }

    c.into_report("randomness")
}

pub fn run_suites(suite: Suite, seed: u64) -> Vec<SuiteReport> {
    match suite {
        Suite::All => vec![
            roundtrip_suite(seed),
            oracle_suite(seed),
            parametrization_suite(),
            randomness_suite(seed),
        ],
        Suite::Roundtrip => vec![roundtrip_suite(seed)],
        Suite::Oracle => vec![oracle_suite(seed)],
        Suite::Parametrization => vec![parametrization_suite()],
        Suite::Randomness => vec![randomness_suite(seed)],
    }
}
