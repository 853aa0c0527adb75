//! Semi-implicit midpoint integration of the positive-P equations.
//!
//! Noise multiplies only `a1, a1+, a2, a2+` with coefficients depending on `a3, a3+`,
//! which are themselves noiseless, so the Ito and Stratonovich forms coincide and the
//! midpoint rule needs no drift correction.

use num_complex::Complex64;

use crate::params::SystemParams;

use super::PhaseSpacePoint;

/// Fixed-point iterations used to locate the midpoint.
pub const MIDPOINT_ITERATIONS: usize = 3;

/// Noise-free right-hand side of the intracavity equations (travelling wave when all
/// loss rates and pumps vanish).
#[inline]
pub fn drift(p: &SystemParams, x: &PhaseSpacePoint) -> PhaseSpacePoint {
    let k = p.kappa;
    PhaseSpacePoint {
        a1: p.eps1 - p.gamma1 * x.a1 + k * x.a2p * x.a3,
        a1p: p.eps1.conj() - p.gamma1 * x.a1p + k * x.a2 * x.a3p,
        a2: p.eps2 - p.gamma2 * x.a2 + k * x.a1p * x.a3,
        a2p: p.eps2.conj() - p.gamma2 * x.a2p + k * x.a1 * x.a3p,
        a3: -p.gamma3 * x.a3 - k * x.a1 * x.a2,
        a3p: -p.gamma3 * x.a3p - k * x.a1p * x.a2p,
    }
}

/// Principal square root without the polar round trip (same branch cut as
/// `Complex64::sqrt`, several times cheaper).
#[inline]
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, z.im);
    }
    // |z| without hypot: amplitudes are bounded far below overflow by the divergence guard.
    let r = z.norm_sqr().sqrt();
    let t = (0.5 * (r + z.re.abs())).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Stochastic increment for real Wiener increments `dw` (already scaled by `sqrt(dt)`).
#[inline]
pub fn diffusion(kappa: f64, x: &PhaseSpacePoint, dw: [f64; 4]) -> PhaseSpacePoint {
    let s = principal_sqrt(kappa * x.a3 * 0.5);
    let sp = principal_sqrt(kappa * x.a3p * 0.5);
    let w13p = Complex64::new(dw[0], dw[2]);
    let w13m = Complex64::new(dw[0], -dw[2]);
    let w24p = Complex64::new(dw[1], dw[3]);
    let w24m = Complex64::new(dw[1], -dw[3]);
    PhaseSpacePoint {
        a1: s * w13p,
        a1p: sp * w24p,
        a2: s * w13m,
        a2p: sp * w24m,
        a3: Complex64::default(),
        a3p: Complex64::default(),
    }
}

/// One step of length `dt` driven by four standard normal deviates `noise`.
#[inline]
pub fn step(p: &SystemParams, state: &PhaseSpacePoint, dt: f64, noise: [f64; 4]) -> PhaseSpacePoint {
    let sq = dt.sqrt();
    let dw = noise.map(|n| n * sq);
    let mut mid = *state;
    for _ in 0..MIDPOINT_ITERATIONS {
        let a = drift(p, &mid);
        let b = diffusion(p.kappa, &mid, dw);
        mid = state.zip(&a, &b, |x, a, b| x + 0.5 * (a * dt + b));
    }
    mid.zip(state, state, |m, x, _| 2.0 * m - x)
}
