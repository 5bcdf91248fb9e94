use thiserror::Error;

/// Errors for key handling, encryption, cache assembly, and tensor encoding.
#[derive(Debug, Error)]
pub enum Error {
    #[error("key size must be at least {min} bits, got {got}")]
    KeyTooSmall { got: u32, min: u32 },

    #[error("prime generation failed after {attempts} attempts")]
    PrimeGeneration { attempts: u32 },

    #[error("invalid key material: {0}")]
    InvalidKey(String),

    #[error("plaintext {value} outside [0, {modulus})")]
    PlaintextOutOfRange { value: String, modulus: String },

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("ciphertext was produced under a different key")]
    KeyMismatch,

    #[error("invalid cache configuration: {0}")]
    BadCacheConfig(String),

    #[error("cache capacity exceeded: {0}")]
    Capacity(String),

    #[error("value {value} outside [0, {max}]")]
    OutOfRange { value: u128, max: u128 },

    #[error("exhaustive scan over {m} values exceeds budget {budget}")]
    ScanBudget { m: u128, budget: u128 },

    #[error("tensor bit width {tensor} exceeds cache bit width {cache}")]
    BitWidthMismatch { tensor: u32, cache: u32 },

    #[error("invalid quantization parameters: {0}")]
    BadQuantParams(String),

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("shape {shape:?} does not match {len} values")]
    ShapeMismatch { shape: Vec<usize>, len: usize },

    #[error("element {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("tensor mismatch: {0}")]
    TensorMismatch(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn at_element(self, index: usize) -> Error {
        Error::Element {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
