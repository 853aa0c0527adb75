use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Closed-form root failed its substitution check.
    #[error("steady state residual {residual:e} exceeds tolerance; cubic roots {candidates:?}")]
    Inconsistent {
        residual: f64,
        candidates: Vec<Complex64>,
    },

    #[error("steady-state solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: [Complex64; 3],
    },

    #[error(
        "operating point is unstable (stability margin {margin:e}); the linearized spectrum is \
         not valid there, integrate the full stochastic equations instead"
    )]
    Unstable { margin: f64 },

    #[error("ensemble quality: {diverged} of {total} trajectories diverged")]
    EnsembleQuality { diverged: usize, total: usize },

    #[error("Fano factor undefined: mean intensity {mean:e} below guard")]
    UndefinedFano { mean: f64 },

    #[error("EPR product undefined: steering-mode variance {variance:e} below guard")]
    UndefinedEpr { variance: f64 },

    #[error("correlation has imaginary residue {residue:e} above tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },
}
