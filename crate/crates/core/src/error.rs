use thiserror::Error;

use crate::solver::RaisingStepsReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-manifold complex: face {face:?} has {cofaces} incident top simplices")]
    NonManifold { face: Vec<usize>, cofaces: usize },

    #[error("non-orientable complex: {0}")]
    NonOrientable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {degree} out of range (allowed {min}..={max})")]
    DegreeOutOfRange {
        degree: usize,
        min: usize,
        max: usize,
    },

    #[error("complex has empty boundary; nothing to double")]
    ClosedInput,

    #[error("degenerate {degree}-simplex #{index} (zero volume)")]
    DegenerateSimplex { degree: usize, index: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("cochain belongs to a different complex")]
    ComplexMismatch,

    #[error("length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite cochain value at simplex {0}")]
    NonFinite(usize),

    #[error(
        "ambiguous spectral gap in degree {degree}: largest kernel eigenvalue {largest_kernel:e}, \
         smallest nonzero {smallest_nonzero:e} (gap {gap:.3e} < 1e3); try a different null_tol or a finer mesh"
    )]
    SpectralGapAmbiguity {
        degree: usize,
        largest_kernel: f64,
        smallest_nonzero: f64,
        gap: f64,
    },

    #[error("coverage failure: {0}")]
    CoverageFailure(String),

    #[error("factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("right-hand side is not orthogonal to harmonic forms: |H(w)|/|w| = {relative_leak:e}")]
    CompatibilityViolation { relative_leak: f64 },

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("residual diverged at step {step}: |w_k+1|/|w_k| = {ratio:.3e}")]
    ResidualDivergence {
        step: usize,
        ratio: f64,
        report: Box<RaisingStepsReport>,
    },

    #[error("contraction failure at term {step}: ratio {ratio:.3e} at or above cap for 3 consecutive terms")]
    ContractionFailure { step: usize, ratio: f64 },

    #[error("singular Gram system (reciprocal condition {rcond:e})")]
    SingularGram { rcond: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
