//! Physical parameters of the triply resonant sum frequency cavity.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether modes 1 and 2 are driven symmetrically.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// Nonlinearity, loss rates and coherent pump amplitudes.
///
/// The travelling-wave interaction is the special case with all loss rates and
/// pumps set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub eps1: Complex64,
    pub eps2: Complex64,
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= SYMMETRY_RTOL * a.abs().max(b.abs())
}

impl SystemParams {
    pub fn new(
        kappa: f64,
        gamma1: f64,
        gamma2: f64,
        gamma3: f64,
        eps1: Complex64,
        eps2: Complex64,
    ) -> Result<Self> {
        let p = Self {
            kappa,
            gamma1,
            gamma2,
            gamma3,
            eps1,
            eps2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric cavity: `gamma1 = gamma2 = gamma`, real pumps `eps1 = eps2 = eps`.
    pub fn symmetric(kappa: f64, gamma: f64, gamma3: f64, eps: f64) -> Result<Self> {
        Self::new(
            kappa,
            gamma,
            gamma,
            gamma3,
            Complex64::new(eps, 0.0),
            Complex64::new(eps, 0.0),
        )
    }

    /// Lossless, unpumped interaction.
    pub fn travelling_wave(kappa: f64) -> Result<Self> {
        Self::new(kappa, 0.0, 0.0, 0.0, Complex64::default(), Complex64::default())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must satisfy kappa > 0, got {}",
                self.kappa
            )));
        }
        for (name, g) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
        ] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must satisfy {name} >= 0, got {g}"
                )));
            }
        }
        for (name, e) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// True iff `gamma1 = gamma2` and `eps1 = eps2` within [`SYMMETRY_RTOL`].
    pub fn is_symmetric(&self) -> bool {
        rel_eq(self.gamma1, self.gamma2)
            && rel_eq(self.eps1.re, self.eps2.re)
            && rel_eq(self.eps1.im, self.eps2.im)
    }

    pub fn is_travelling_wave(&self) -> bool {
        self.gamma1 == 0.0
            && self.gamma2 == 0.0
            && self.gamma3 == 0.0
            && self.eps1 == Complex64::default()
            && self.eps2 == Complex64::default()
    }

    pub fn max_gamma(&self) -> f64 {
        self.gamma1.max(self.gamma2).max(self.gamma3)
    }

    /// Parameters with modes 1 and 2 exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            eps1: self.eps2,
            eps2: self.eps1,
            ..*self
        }
    }

    /// Classical (noise-free) right-hand sides for the high-frequency-coupled cavity,
    /// evaluated on a conjugate-consistent point `(a1, a2, a3)`.
    pub fn classical_rhs(&self, a: [Complex64; 3]) -> [Complex64; 3] {
        let k = self.kappa;
        let [a1, a2, a3] = a;
        [
            self.eps1 - self.gamma1 * a1 + k * a2.conj() * a3,
            self.eps2 - self.gamma2 * a2 + k * a1.conj() * a3,
            -self.gamma3 * a3 - k * a1 * a2,
        ]
    }

    /// Largest absolute value of the classical fixed-point equations.
    pub fn residual(&self, a: [Complex64; 3]) -> f64 {
        self.classical_rhs(a)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
