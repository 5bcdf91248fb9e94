use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hecache::{AdditiveScheme, CacheParams, Paillier, Transparent};

use hecache_cli::fl::{fl_round, DistributionTag, FlRoundSpec};
use hecache_cli::report::Report;
use hecache_cli::runner::{
    bench_cache_build, bench_encrypt, build_cache_bundle, BenchConfig,
};
use hecache_cli::verify::{run_suites, Suite};
use hecache_cli::workload::{ValueDistribution, WorkloadSpec};

#[derive(Parser)]
#[command(
    name = "hecache",
    version,
    about = "Benchmarks and checks for cached homomorphic encryption",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Paillier,
    Debug,
}

/// Tensor shape written as dimensions joined by `x`, e.g. `28x28`.
#[derive(Debug, Clone)]
struct Shape(Vec<usize>);

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dims = s
            .split('x')
            .map(|d| d.trim().parse::<usize>().map_err(|e| format!("bad dimension {d:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if dims.is_empty() {
            return Err("shape needs at least one dimension".into());
        }
        Ok(Shape(dims))
    }
}

#[derive(Args)]
struct Common {
    /// Decomposition radix
    #[arg(long, default_value_t = 2)]
    radix: u32,
    /// Plaintext bit width B; cached values live in [0, 2^B)
    #[arg(long, default_value_t = 16)]
    bits: u32,
    /// Zero-pool size
    #[arg(long, default_value_t = 64)]
    zeros: usize,
    /// Key size in bits
    #[arg(long, default_value_t = 2048)]
    key_bits: u32,
    /// Encryption scheme; `debug` is transparent and for testing only
    #[arg(long, value_enum, default_value_t = SchemeArg::Paillier)]
    scheme: SchemeArg,
    /// Base seed for keys, workloads, and encryption randomness
    #[arg(long, env = "HECACHE_SEED", default_value_t = 42)]
    seed: u64,
}

impl Common {
    fn config(&self, repetitions: u32, parallel: bool) -> BenchConfig {
        BenchConfig {
            cache: CacheParams {
                radix: self.radix,
                bit_width: self.bits,
                zero_pool: self.zeros,
                min_zero_inclusions: 1,
            },
            key_bits: self.key_bits,
            repetitions,
            seed: self.seed,
            parallel,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a CSV flattening of the raw timings
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pre-encrypt a radix cache and optionally save it, with its
    /// keypair, as a JSON bundle
    BuildCache {
        #[command(flatten)]
        common: Common,
        /// Bundle path; the file includes the secret key, bench use only
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time direct vs cached encryption on a synthetic workload
    BenchEncrypt {
        #[command(flatten)]
        common: Common,
        /// Workload label for the report
        #[arg(long, default_value = "mnist-like")]
        name: String,
        /// Tensor shape, e.g. 28x28
        #[arg(long, default_value = "28x28")]
        shape: Shape,
        /// Fraction of nonzero elements in [0, 1]
        #[arg(long, default_value_t = 0.179)]
        rate: f64,
        /// Tensors per repetition batch
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Timed repetitions (at least 3)
        #[arg(long, default_value_t = 3)]
        reps: u32,
        /// Encrypt elements across a thread pool
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Time cache construction across bit widths
    BenchCacheBuild {
        /// Decomposition radix
        #[arg(long, default_value_t = 2)]
        radix: u32,
        /// Bit widths to build, comma separated
        #[arg(long, value_delimiter = ',', default_values_t = [16u32, 32, 64, 128])]
        bits: Vec<u32>,
        /// Zero-pool size
        #[arg(long, default_value_t = 128)]
        zeros: usize,
        /// Key size in bits
        #[arg(long, default_value_t = 2048)]
        key_bits: u32,
        /// Encryption scheme; `debug` is transparent and for testing only
        #[arg(long, value_enum, default_value_t = SchemeArg::Paillier)]
        scheme: SchemeArg,
        /// Base seed
        #[arg(long, env = "HECACHE_SEED", default_value_t = 42)]
        seed: u64,
        /// Timed repetitions per width
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one federated aggregation round and verify it is exact
    FlRound {
        #[command(flatten)]
        common: Common,
        /// Total client population
        #[arg(long, default_value_t = 30)]
        clients: usize,
        /// Fraction of clients participating, in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        /// Flat weight count per client
        #[arg(long, default_value_t = 256)]
        model_size: usize,
        /// Data split tag, recorded in the report
        #[arg(long, value_enum, default_value_t = DistributionArg::Iid)]
        distribution: DistributionArg,
        /// Timed repetitions
        #[arg(long, default_value_t = 3)]
        reps: u32,
        /// Encrypt elements across a thread pool
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suites and report pass/fail per suite
    Verify {
        /// Which suite to run
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Base seed
        #[arg(long, env = "HECACHE_SEED", default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[clap(rename_all = "kebab-case")]
enum DistributionArg {
    Iid,
    NonIid,
}

impl From<DistributionArg> for DistributionTag {
    fn from(d: DistributionArg) -> Self {
        match d {
            DistributionArg::Iid => DistributionTag::Iid,
            DistributionArg::NonIid => DistributionTag::NonIid,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Ok(false) means the run completed but an invariant failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Cmd::BuildCache { common, out } => match common.scheme {
            SchemeArg::Paillier => run_build_cache::<Paillier>(&common, out.as_deref()),
            SchemeArg::Debug => run_build_cache::<Transparent>(&common, out.as_deref()),
        },
        Cmd::BenchEncrypt {
            common,
            name,
            shape,
            rate,
            samples,
            reps,
            parallel,
            output,
        } => {
            let spec = WorkloadSpec {
                name,
                shape: shape.0,
                nonempty_rate: rate,
                bit_width: common.bits,
                value_distribution: ValueDistribution::Uniform,
                sample_count: samples,
                seed: common.seed,
            };
            let cfg = common.config(reps, parallel);
            let report = match common.scheme {
                SchemeArg::Paillier => bench_encrypt::<Paillier>(&spec, &cfg)?,
                SchemeArg::Debug => bench_encrypt::<Transparent>(&spec, &cfg)?,
            };
            summary(format!(
                "{}: direct {:.4}s, cached {:.4}s, reduction {:.1}%",
                report.workload,
                report.direct_encrypt.mean_seconds,
                report.cached_encrypt.mean_seconds,
                report.reduction_percent
            ));
            emit(&Report::BenchEncrypt(report), &output)?;
            Ok(true)
        }
        Cmd::BenchCacheBuild {
            radix,
            bits,
            zeros,
            key_bits,
            scheme,
            seed,
            reps,
            output,
        } => {
            let cfg = BenchConfig {
                cache: CacheParams {
                    radix,
                    bit_width: bits[0],
                    zero_pool: zeros,
                    min_zero_inclusions: 1,
                },
                key_bits,
                repetitions: reps,
                seed,
                parallel: false,
            };
            let report = match scheme {
                SchemeArg::Paillier => bench_cache_build::<Paillier>(&bits, &cfg)?,
                SchemeArg::Debug => bench_cache_build::<Transparent>(&bits, &cfg)?,
            };
            for row in &report.rows {
                summary(format!(
                    "B={:3} -> {} entries in {:.4}s ({:.6}s per entry)",
                    row.bit_width, row.entries, row.build.mean_seconds, row.seconds_per_entry
                ));
            }
            let ok = report.checks.all_pass();
            if !ok {
                summary(format!(
                    "growth checks failed: nondecreasing={}, linear={}",
                    report.checks.nondecreasing, report.checks.linear_growth
                ));
            }
            emit(&Report::BenchCacheBuild(report), &output)?;
            Ok(ok)
        }
        Cmd::FlRound {
            common,
            clients,
            fraction,
            model_size,
            distribution,
            reps,
            parallel,
            output,
        } => {
            let spec = FlRoundSpec {
                client_count: clients,
                fraction,
                model_size,
                distribution: distribution.into(),
                seed: common.seed,
            };
            let cfg = common.config(reps, parallel);
            let report = match common.scheme {
                SchemeArg::Paillier => fl_round::<Paillier>(&spec, &cfg)?,
                SchemeArg::Debug => fl_round::<Transparent>(&spec, &cfg)?,
            };
            summary(format!(
                "{} of {} clients aggregated: exact={}, direct {:.4}s, cached {:.4}s, reduction {:.1}%",
                report.participants,
                report.client_count,
                report.exact_aggregate,
                report.direct_encrypt.mean_seconds,
                report.cached_encrypt.mean_seconds,
                report.reduction_percent
            ));
            let ok = report.exact_aggregate;
            if !ok {
                summary("aggregation verdict: decrypted sum does not match the plaintext oracle");
            }
            emit(&Report::FlRound(report), &output)?;
            Ok(ok)
        }
        Cmd::Verify { suite, seed } => {
            let mut all_ok = true;
            for outcome in run_suites(suite, seed) {
                if outcome.passed() {
                    println!("PASS {} ({} checks)", outcome.suite, outcome.checks);
                } else {
                    all_ok = false;
                    println!(
                        "FAIL {} ({} of {} checks failed)",
                        outcome.suite,
                        outcome.failures.len(),
                        outcome.checks
                    );
                    for failure in &outcome.failures {
                        println!("  - {failure}");
                    }
                }
            }
            Ok(all_ok)
        }
    }
}

fn run_build_cache<S: AdditiveScheme>(
    common: &Common,
    out: Option<&std::path::Path>,
) -> anyhow::Result<bool> {
    let cfg = common.config(1, false);
    let (bundle, build_seconds) = build_cache_bundle::<S>(&cfg)?;
    summary(format!(
        "built {} cache: {} radix entries + {} zeros in {:.3}s, fingerprint {}",
        bundle.scheme,
        bundle.cache.radix_entries().len(),
        bundle.cache.zero_entries().len(),
        build_seconds,
        &bundle.fingerprint[..16],
    ));
    match out {
        Some(path) => {
            std::fs::write(path, serde_json::to_string_pretty(&bundle)?)?;
            summary(format!(
                "bundle written to {} (contains the secret key; bench fixture only)",
                path.display()
            ));
        }
        None => println!("{}", serde_json::to_string_pretty(&bundle)?),
    }
    Ok(true)
}

/// Human-readable progress goes to stderr so stdout stays parseable.
fn summary(line: impl Display) {
    eprintln!("{line}");
}

fn emit(report: &Report, output: &OutputArgs) -> anyhow::Result<()> {
    for warning in report.warnings() {
        eprintln!("warning: {warning}");
    }
    match &output.out {
        Some(path) => report.write_json(path)?,
        None => println!("{}", report.to_json()),
    }
    if let Some(path) = &output.csv {
        report.write_csv(path)?;
    }
    Ok(())
}
