//! Machine-readable run reports: JSON documents plus a CSV flattening
//! of the raw repetition timings for plotting.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use hecache::CacheParams;
use serde::{Deserialize, Serialize};

/// Durations below this are too close to timer resolution to trust;
/// reports carry a warning instead of silently shaky numbers.
pub const TIMER_FLOOR_SECONDS: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_seconds: f64,
    pub std_seconds: f64,
    /// Every timed repetition, in order; kept for re-analysis.
    pub raw_seconds: Vec<f64>,
}

impl TimingStats {
    pub fn from_raw(raw_seconds: Vec<f64>) -> Self {
        let n = raw_seconds.len().max(1) as f64;
        let mean = raw_seconds.iter().sum::<f64>() / n;
        let var = if raw_seconds.len() > 1 {
            raw_seconds.iter().map(|t| (t - mean).powi(2)).sum::<f64>()
                / (raw_seconds.len() - 1) as f64
        } else {
            0.0
        };
        TimingStats {
            mean_seconds: mean,
            std_seconds: var.sqrt(),
            raw_seconds,
        }
    }

    pub fn near_timer_resolution(&self) -> bool {
        self.raw_seconds.iter().any(|&t| t < TIMER_FLOOR_SECONDS)
    }
}

pub fn reduction_percent(direct_mean: f64, cached_mean: f64) -> f64 {
    100.0 * (1.0 - cached_mean / direct_mean)
}

/// Configuration common to every run, echoed into each report so a
/// report alone suffices to rerun the measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunContext {
    pub scheme: String,
    pub key_bits: u32,
    pub cache: CacheParams,
    pub seed: u64,
    /// Encryption worker threads; 1 means the sequential path.
    pub workers: usize,
    pub repetitions: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncryptReport {
    pub context: RunContext,
    pub workload: String,
    pub elements_per_repetition: usize,
    pub nonempty_rate: f64,
    pub cache_build: TimingStats,
    pub direct_encrypt: TimingStats,
    pub cached_encrypt: TimingStats,
    pub reduction_percent: f64,
    /// Additions joining radix-power entries in one pass over the
    /// workload; identical across repetitions by construction.
    pub digit_join_additions: u64,
    /// Zero-pool additions in the last repetition (mask draws differ
    /// between repetitions).
    pub randomizer_additions: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheBuildRow {
    pub bit_width: u32,
    pub entries: usize,
    pub build: TimingStats,
    pub seconds_per_entry: f64,
}

/// Growth assertions evaluated over the build rows.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CacheBuildChecks {
    /// Mean build time never shrinks as the bit width grows.
    pub nondecreasing: bool,
    /// Per-entry time stays within a constant factor across widths,
    /// i.e. total time grows at most linearly in the entry count.
    pub linear_growth: bool,
}

impl CacheBuildChecks {
    pub fn all_pass(&self) -> bool {
        self.nondecreasing && self.linear_growth
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheBuildReport {
    pub context: RunContext,
    pub rows: Vec<CacheBuildRow>,
    pub checks: CacheBuildChecks,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlReport {
    pub context: RunContext,
    pub client_count: usize,
    pub fraction: f64,
    pub participants: usize,
    pub model_size: usize,
    pub distribution: String,
    pub quant_bit_width: u32,
    pub cache_build: TimingStats,
    pub direct_encrypt: TimingStats,
    pub cached_encrypt: TimingStats,
    pub aggregate_seconds: f64,
    pub reduction_percent: f64,
    /// Decrypted aggregate equals the plaintext quantized sum exactly
    /// after removing the per-participant offsets.
    pub exact_aggregate: bool,
    pub digit_join_additions: u64,
    pub randomizer_additions: u64,
    pub warnings: Vec<String>,
}

/// One report per run, tagged by kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    BenchEncrypt(EncryptReport),
    BenchCacheBuild(CacheBuildReport),
    FlRound(FlReport),
}

impl Report {
    pub fn warnings(&self) -> &[String] {
        match self {
            Report::BenchEncrypt(r) => &r.warnings,
            Report::BenchCacheBuild(r) => &r.warnings,
            Report::FlRound(r) => &r.warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> io::Result<()> {
        let mut f = File::create(path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")
    }

    /// Flattens the raw timings into rows for plotting.
    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        let mut f = File::create(path)?;
        match self {
            Report::BenchEncrypt(r) => {
                writeln!(f, "workload,phase,repetition,seconds")?;
                let phases = [
                    ("cache_build", &r.cache_build),
                    ("direct_encrypt", &r.direct_encrypt),
                    ("cached_encrypt", &r.cached_encrypt),
                ];
                for (phase, stats) in phases {
                    for (i, t) in stats.raw_seconds.iter().enumerate() {
                        writeln!(f, "{},{phase},{i},{t:.9}", r.workload)?;
                    }
                }
            }
            Report::BenchCacheBuild(r) => {
                writeln!(f, "bit_width,entries,repetition,seconds")?;
                for row in &r.rows {
                    for (i, t) in row.build.raw_seconds.iter().enumerate() {
                        writeln!(f, "{},{},{i},{t:.9}", row.bit_width, row.entries)?;
                    }
                }
            }
            Report::FlRound(r) => {
                writeln!(f, "phase,repetition,seconds")?;
                for (phase, stats) in [
                    ("cache_build", &r.cache_build),
                    ("direct_encrypt", &r.direct_encrypt),
                    ("cached_encrypt", &r.cached_encrypt),
                ] {
                    for (i, t) in stats.raw_seconds.iter().enumerate() {
                        writeln!(f, "{phase},{i},{t:.9}")?;
                    }
                }
                writeln!(f, "aggregate,0,{:.9}", r.aggregate_seconds)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_mean_and_std() {
        let s = TimingStats::from_raw(vec![1.0, 2.0, 3.0]);
        assert!((s.mean_seconds - 2.0).abs() < 1e-12);
        assert!((s.std_seconds - 1.0).abs() < 1e-12);
        let single = TimingStats::from_raw(vec![0.5]);
        assert_eq!(single.std_seconds, 0.0);
    }

    #[test]
    fn reduction_formula() {
        assert!((reduction_percent(10.0, 1.0) - 90.0).abs() < 1e-12);
        assert!((reduction_percent(4.0, 4.0)).abs() < 1e-12);
        assert!(reduction_percent(1.0, 2.0) < 0.0);
    }

    #[test]
    fn flags_sub_resolution_timings() {
        assert!(TimingStats::from_raw(vec![1e-6]).near_timer_resolution());
        assert!(!TimingStats::from_raw(vec![1e-3]).near_timer_resolution());
    }
}
