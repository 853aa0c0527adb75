//! Quantum dynamics of sum frequency generation in the positive-P representation.
//!
//! - [`params`], [`steady`], [`stability`]: the driven cavity's classical fixed points and
//!   their linear stability.
//! - [`dynamics`]: reproducible positive-P trajectory ensembles (travelling wave and cavity).
//! - [`observables`]: squeezing, Fano, Duan-Simon and EPR correlations from ensemble moments.
//! - [`spectral`]: linearized output spectra about a stable steady state.

pub mod dynamics;
pub mod error;
pub mod observables;
pub mod params;
pub mod spectral;
pub mod stability;
pub mod steady;

pub use error::{Error, Result};
pub use params::SystemParams;

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
