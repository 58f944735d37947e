use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("Hamiltonian is a multiple of the identity; at least two levels are required")]
    ScalarHamiltonian,
    #[error("clustering is ambiguous: {0}")]
    ClusterAmbiguity(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not a Bohr frequency of the atom")]
    NotABohrFrequency(f64),
    #[error("pump support violation: {0}")]
    PumpSupportViolation(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("quadrature rules disagree: {first} vs {second}")]
    DisagreementBetweenRules { first: f64, second: f64 },
    #[error("form factors {a} and {b} are not orthogonal (normalized overlap {overlap:.3e})")]
    NonOrthogonalFamily { a: usize, b: usize, overlap: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("positivity breach at t = {t}: minimum eigenvalue {min_eig:.3e}")]
    PositivityBreach { t: f64, min_eig: f64 },
    #[error("generator kernel has dimension {dim}, expected 1")]
    DegenerateKernel { dim: usize },
    #[error("kernel element is not positive (minimum eigenvalue {min_eig:.3e})")]
    NonPositiveKernel { min_eig: f64 },
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("contour passes within {distance:.3e} of the spectrum")]
    ContourHitsSpectrum { distance: f64 },
    #[error("Riesz projection is not idempotent (defect {defect:.3e})")]
    IdempotencyFailure { defect: f64 },
    #[error("projections too far apart: ||(P-Q)^2|| = {norm:.3e}")]
    ProjectionPairTooFar { norm: f64 },
    #[error("1 - (P-Q)^2 is nearly singular (smallest singular value {sigma_min:.3e})")]
    NearSingularPair { sigma_min: f64 },
    #[error("abscissa {w} does not exceed the spectral bound {bound}")]
    AbscissaTooLow { w: f64, bound: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
