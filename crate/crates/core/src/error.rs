use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the operator algebra, representation builders, the
/// evolution engine and the scenario layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("non-finite entry in matrix")]
    NonFinite,
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("operator list is empty")]
    EmptyOperatorList,
    #[error("zero Lindblad operator at index {0}")]
    ZeroOperator(usize),
    #[error("spin quantum number must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
    #[error("Fock cutoff {cutoff} below the minimum {minimum}")]
    CutoffTooSmall { cutoff: usize, minimum: usize },
    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange { what: &'static str, value: usize, min: usize, max: usize },
    #[error("Gram matrix of the Hermitian basis is degenerate")]
    DegenerateGram,
    #[error("commutator of basis elements {0} and {1} leaves the span (residual {2:.3e})")]
    NotClosed(usize, usize, f64),
    #[error("expected {expected} displacement parameters, got {found}")]
    WrongParamLength { expected: usize, found: usize },
    #[error("displacement amplitude {amplitude:.4} exceeds the truncation guard {guard:.4}")]
    TruncationGuard { amplitude: f64, guard: f64 },
    #[error("negative or unsorted evolution time {0}")]
    InvalidTime(f64),
    #[error("averaging window must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("representation has no highest-weight reference state")]
    MissingReference,
    #[error("|c| = |d| leaves no normalizable eigenstate of c a + d a^dagger")]
    DegenerateQuadrature,
    #[error("multiplicity of block j={0} is 1; no noiseless subsystem")]
    NoMultiplicity(f64),
    #[error("no block with j={0} in the decomposition")]
    MissingBlock(f64),
    #[error("representation '{0}' is not a collective spin representation")]
    NotCollective(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path} at line {line}, column {column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
