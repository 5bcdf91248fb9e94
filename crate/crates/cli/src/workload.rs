//! Synthetic workloads matched to real data characteristics.
//!
//! The cached-encryption cost of a tensor depends only on its sparsity
//! and value distribution, not on what the values mean, so benchmarks
//! run on seeded synthetic tensors: each element is nonzero with the
//! workload's nonempty rate, and nonzero values are drawn uniformly
//! from `[1, 2^bit_width)`.

use hecache::tensor::{QuantParams, TensorPlain};
use hecache::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Value distribution on the nonzero support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDistribution {
    /// Uniform over `[1, 2^bit_width)`.
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub name: String,
    pub shape: Vec<usize>,
    /// Probability that an element is nonzero, in `[0, 1]`.
    pub nonempty_rate: f64,
    pub bit_width: u32,
    pub value_distribution: ValueDistribution,
    /// Number of tensors in the workload batch.
    pub sample_count: usize,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn uniform(
        name: impl Into<String>,
        shape: Vec<usize>,
        nonempty_rate: f64,
        bit_width: u32,
        seed: u64,
    ) -> Self {
        WorkloadSpec {
            name: name.into(),
            shape,
            nonempty_rate,
            bit_width,
            value_distribution: ValueDistribution::Uniform,
            sample_count: 1,
            seed,
        }
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.is_empty() || self.element_count() == 0 {
            return Err(Error::BadQuantParams(format!(
                "workload shape {:?} has no elements",
                self.shape
            )));
        }
        if !(0.0..=1.0).contains(&self.nonempty_rate) {
            return Err(Error::BadQuantParams(format!(
                "nonempty rate must lie in [0, 1], got {}",
                self.nonempty_rate
            )));
        }
        if self.bit_width == 0 || self.bit_width > 63 {
            return Err(Error::BadQuantParams(format!(
                "bit width must be in [1, 63], got {}",
                self.bit_width
            )));
        }
        if self.sample_count == 0 {
            return Err(Error::BadQuantParams("sample count must be positive".into()));
        }
        Ok(())
    }
}

/// Generates the `index`-th tensor of the workload. Fully determined by
/// `(spec.seed, index)`; rerunning a spec regenerates identical data.
pub fn synth_tensor(spec: &WorkloadSpec, index: usize) -> Result<TensorPlain> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let quant = QuantParams::unsigned(spec.bit_width, 1.0)?;
    let upper = 1u64 << spec.bit_width;
    let values: Vec<u64> = (0..spec.element_count())
        .map(|_| {
            if rng.gen_bool(spec.nonempty_rate) {
                match spec.value_distribution {
                    ValueDistribution::Uniform => rng.gen_range(1..upper),
                }
            } else {
                0
            }
        })
        .collect();
    TensorPlain::new(spec.shape.clone(), values, quant)
}

/// All `sample_count` tensors of the workload.
pub fn synth_batch(spec: &WorkloadSpec) -> Result<Vec<TensorPlain>> {
    (0..spec.sample_count)
        .map(|i| synth_tensor(spec, i))
        .collect()
}
