use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is not an orthogonal projection (residual {0:.3e})")]
    NotProjection(f64),

    #[error("not reflection positive (minimum Choi eigenvalue {0:.3e})")]
    NotReflectionPositive(f64),

    #[error("zero vector")]
    ZeroVector,

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("assembled Hamiltonian is not Hermitian (relative deviation {0:.3e})")]
    NotHermitianAssembly(f64),

    #[error("cross terms are linearly dependent (rank {rank} of {count})")]
    LinearlyDependent { rank: usize, count: usize },

    #[error("Kraus family is not closed under adjoint")]
    NotAdjointClosed,

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("spectral radius vanishes")]
    ZeroSpectralRadius,

    #[error("spectral gap {gap:.3e} below reliability threshold {threshold:.3e}")]
    Gapless { gap: f64, threshold: f64 },

    #[error("ground projection annihilates the maximally entangled vector")]
    ZeroPf,

    #[error("vector is not a ground state (residual {0:.3e})")]
    NotGroundState(f64),

    #[error("frustration detected: block ground energies {0:?}")]
    FrustrationDetected([f64; 4]),

    #[error("not reflection symmetric: {0}")]
    NotReflectionSymmetric(String),

    #[error("non-integer Wedderburn block (numerical size {0})")]
    NonIntegerBlock(f64),

    #[error("spectral collision while splitting the center after {0} attempts")]
    CenterSplitFailed(usize),

    #[error("interaction algebra differs from bicommutant of the local commutant (residual {0:.3e})")]
    InteractionAlgebraMismatch(f64),

    #[error("not a field operator: {0}")]
    NotAFieldOperator(String),

    #[error("inclusion does not commute with the entanglement support (residual {0:.3e})")]
    CommutationFailure(f64),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("inadmissible labels: {0}")]
    Inadmissible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed")]
    EigenFailure,

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
