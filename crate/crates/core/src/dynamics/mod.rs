//! Positive-P trajectory ensembles for the travelling-wave and intracavity equations.

mod ensemble;
pub mod integrator;
mod moments;
pub mod noise;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub use ensemble::{run_ensemble, semiclassical_trajectory, SemiclassicalPath};
pub use moments::{Batch, MomentTable, Moments, Var, NUM_MOMENTS};

/// Any component above this magnitude flags the trajectory as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Largest tolerated fraction of diverged trajectories.
pub const MAX_DIVERGED_FRACTION: f64 = 1e-4;

/// Number of equal trajectory batches used for standard errors.
pub const NUM_BATCHES: usize = 64;

/// One point of the doubled phase space; the `p` fields are the independent
/// plus-variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSpacePoint {
    pub a1: Complex64,
    pub a1p: Complex64,
    pub a2: Complex64,
    pub a2p: Complex64,
    pub a3: Complex64,
    pub a3p: Complex64,
}

impl PhaseSpacePoint {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Coherent-state point with plus-variables equal to the conjugates.
    pub fn coherent(a1: Complex64, a2: Complex64, a3: Complex64) -> Self {
        Self {
            a1,
            a1p: a1.conj(),
            a2,
            a2p: a2.conj(),
            a3,
            a3p: a3.conj(),
        }
    }

    pub fn to_array(&self) -> [Complex64; 6] {
        [self.a1, self.a1p, self.a2, self.a2p, self.a3, self.a3p]
    }

    pub fn from_array(v: [Complex64; 6]) -> Self {
        Self {
            a1: v[0],
            a1p: v[1],
            a2: v[2],
            a2p: v[3],
            a3: v[4],
            a3p: v[5],
        }
    }

    #[inline]
    pub fn zip(&self, a: &Self, b: &Self, f: impl Fn(Complex64, Complex64, Complex64) -> Complex64) -> Self {
        Self {
            a1: f(self.a1, a.a1, b.a1),
            a1p: f(self.a1p, a.a1p, b.a1p),
            a2: f(self.a2, a.a2, b.a2),
            a2p: f(self.a2p, a.a2p, b.a2p),
            a3: f(self.a3, a.a3, b.a3),
            a3p: f(self.a3p, a.a3p, b.a3p),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// True when the point is non-finite or beyond [`DIVERGENCE_THRESHOLD`].
    #[inline]
    pub fn diverged(&self) -> bool {
        // NaN fails every comparison.
        !self
            .to_array()
            .iter()
            .all(|z| z.norm_sqr() <= DIVERGENCE_THRESHOLD * DIVERGENCE_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMode {
    /// Time measured in `zeta = kappa |a1(0)| t`.
    TravellingWave,
    /// Time measured in the same units as the loss rates.
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_max: f64,
    pub sample_stride: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub mode: IntegrationMode,
}

impl TrajectoryConfig {
    /// Default step: `5e-4` in scaled time for the travelling wave, `1e-3 / max(gamma)`
    /// in the cavity.
    pub fn default_dt(mode: IntegrationMode, params: &SystemParams) -> f64 {
        match mode {
            IntegrationMode::TravellingWave => 5e-4,
            IntegrationMode::Cavity => 1e-3 / params.max_gamma().max(f64::MIN_POSITIVE),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Contract(msg.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be > 0");
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return bad("t_max must be finite and at least dt");
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be >= 1");
        }
        if self.n_traj < 2 {
            return bad("n_traj must be >= 2");
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Number of recorded samples, including `t = 0`.
    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_stride + 1
    }

    /// Sample times in the configured time unit.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.n_samples())
            .map(|s| (s * self.sample_stride) as f64 * self.dt)
            .collect()
    }

    /// Step length in the loss-rate time unit.
    pub fn raw_dt(&self, params: &SystemParams, init: &PhaseSpacePoint) -> Result<f64> {
        match self.mode {
            IntegrationMode::Cavity => Ok(self.dt),
            IntegrationMode::TravellingWave => {
                if !params.is_travelling_wave() {
                    return Err(Error::Contract(
                        "travelling-wave mode requires zero loss rates and pumps".into(),
                    ));
                }
                let scale = params.kappa * init.a1.norm();
                if scale <= 0.0 {
                    return Err(Error::Contract(
                        "travelling-wave time scaling needs a1(0) != 0".into(),
                    ));
                }
                Ok(self.dt / scale)
            }
        }
    }
}
