use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for {n_modes}-mode system")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symplectic (residual {residual:e})")]
    NotSymplectic { residual: f64 },

    #[error("covariance matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("uncertainty relation violated: minimal symplectic eigenvalue {min_eigenvalue}")]
    Uncertainty { min_eigenvalue: f64 },

    #[error("unphysical channel or ancilla: {0}")]
    Unphysical(String),

    #[error("state is not pure (symplectic eigenvalues deviate from 1/2 by {deviation:e})")]
    NotPure { deviation: f64 },

    #[error("entanglement minimization did not converge: {0}")]
    Convergence(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("Fock truncation too coarse: tail mass {tail_mass:e} exceeds {bound:e} at cutoff {cutoff}; increase the cutoff")]
    Truncation {
        cutoff: usize,
        tail_mass: f64,
        bound: f64,
    },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
