//! Linearized fluctuation spectra of the stable cavity.
//!
//! Fluctuations about the classical fixed point, ordered as
//! `(da1, da1+, da2, da2+, da3, da3+)`, obey the Ornstein-Uhlenbeck equation
//! `d(dX) = -A dX dt + B dW`. The intracavity spectral matrix is
//! `S(w) = (A + iw)^-1 B B^T (A^T - iw)^-1`, and output spectra follow from the
//! input-output relations with shot noise normalized to one.

use nalgebra::{Matrix6, SMatrix};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observables::Sign;
use crate::params::SystemParams;
use crate::stability::{sort_eigenvalues, STABILITY_TOL};
use crate::steady::{solve_steady, SteadyStateSolution};

pub type CMatrix6 = Matrix6<Complex64>;

/// Guard on the steering-mode variance in inferred-variance products.
pub const EPR_VARIANCE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub CMatrix6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionProduct(pub CMatrix6);

/// Eigenvalues of a complex 6x6 matrix, sorted by real then imaginary part.
pub fn numeric_eigenvalues(m: &CMatrix6) -> [Complex64; 6] {
    let schur = nalgebra::Schur::new(*m);
    let (_, t) = schur.unpack();
    let mut ev = [Complex64::default(); 6];
    for (i, z) in ev.iter_mut().enumerate() {
        *z = t[(i, i)];
    }
    sort_eigenvalues(&mut ev);
    ev
}

/// Drift matrix of the linearized fluctuations.
pub fn drift_matrix(params: &SystemParams, ss: &SteadyStateSolution) -> DriftMatrix {
    let k = params.kappa;
    let [a1, a2, a3] = ss.amplitudes();
    let (g1, g2, g3) = (params.gamma1, params.gamma2, params.gamma3);
    let z = Complex64::default();
    let r = |x: f64| Complex64::new(x, 0.0);
    #[rustfmt::skip]
    let m = CMatrix6::new(
        r(g1),         z,             z,             -k * a3,       -k * a2.conj(), z,
        z,             r(g1),         -k * a3.conj(), z,             z,              -k * a2,
        z,             -k * a3,       r(g2),         z,             -k * a1.conj(), z,
        -k * a3.conj(), z,            z,             r(g2),         z,              -k * a1,
        k * a2,        z,             k * a1,        z,             r(g3),          z,
        z,             k * a2.conj(), z,             k * a1.conj(), z,              r(g3),
    );
    DriftMatrix(m)
}

/// Coefficients of the four real Wiener increments in the fluctuation equations.
///
/// Rows follow the fluctuation basis; only the low-frequency amplitudes receive noise.
pub fn noise_matrix(params: &SystemParams, ss: &SteadyStateSolution) -> SMatrix<Complex64, 6, 4> {
    let s = (params.kappa * ss.alpha3 / 2.0).sqrt();
    let sp = (params.kappa * ss.alpha3.conj() / 2.0).sqrt();
    let i = Complex64::i();
    let z = Complex64::default();
    #[rustfmt::skip]
    let b = SMatrix::<Complex64, 6, 4>::new(
        s, z,  i * s,  z,
        z, sp, z,      i * sp,
        s, z,  -i * s, z,
        z, sp, z,      -i * sp,
        z, z,  z,      z,
        z, z,  z,      z,
    );
    b
}

/// `D = B B^T`, nonzero only in the (1,3) and (2,4) cross terms.
pub fn diffusion_product(params: &SystemParams, ss: &SteadyStateSolution) -> DiffusionProduct {
    let mut d = CMatrix6::zeros();
    let c = params.kappa * ss.alpha3;
    let cp = params.kappa * ss.alpha3.conj();
    d[(0, 2)] = c;
    d[(2, 0)] = c;
    d[(1, 3)] = cp;
    d[(3, 1)] = cp;
    DiffusionProduct(d)
}

fn margin(a: &DriftMatrix) -> f64 {
    numeric_eigenvalues(&a.0)
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
}

fn spectrum_unchecked(a: &DriftMatrix, d: &DiffusionProduct, omega: f64) -> CMatrix6 {
    let iw = CMatrix6::identity() * Complex64::new(0.0, omega);
    // S (A^T - iw) = (A + iw)^-1 D  <=>  (A - iw) S^T = [(A + iw)^-1 D]^T
    let left = (a.0 + iw)
        .lu()
        .solve(&d.0)
        .expect("A + iw is nonsingular for a stable drift matrix");
    (a.0 - iw)
        .lu()
        .solve(&left.transpose())
        .expect("A - iw is nonsingular for a stable drift matrix")
        .transpose()
}

/// Intracavity spectral matrix at angular frequency `omega`.
pub fn intracavity_spectrum(a: &DriftMatrix, d: &DiffusionProduct, omega: f64) -> Result<CMatrix6> {
    let m = margin(a);
    if m <= STABILITY_TOL {
        return Err(Error::Unstable { margin: m });
    }
    Ok(spectrum_unchecked(a, d, omega))
}

/// Quadrature transform: `X = da + da+`, `Y = -i (da - da+)` for each mode.
pub fn quadrature_transform() -> CMatrix6 {
    let mut u = CMatrix6::zeros();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    for j in 0..3 {
        u[(2 * j, 2 * j)] = one;
        u[(2 * j, 2 * j + 1)] = one;
        u[(2 * j + 1, 2 * j)] = -i;
        u[(2 * j + 1, 2 * j + 1)] = i;
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSpectrum {
    /// Real symmetric covariance over `(X1, Y1, X2, Y2, X3, Y3)`, shot noise = identity.
    pub s_out: Matrix6<f64>,
    /// Largest entry of the anti-Hermitian part of the quadrature spectrum.
    pub asymmetry: f64,
}

/// Output quadrature spectra for vacuum inputs and unit detection efficiency.
pub fn output_spectra(params: &SystemParams, s: &CMatrix6) -> OutputSpectrum {
    let u = quadrature_transform();
    let sq = u * s * u.transpose();
    let herm = (sq + sq.adjoint()) * Complex64::new(0.5, 0.0);
    let asymmetry = (sq - sq.adjoint()).iter().map(|z| 0.5 * z.norm()).fold(0.0, f64::max);
    let g = [
        params.gamma1,
        params.gamma1,
        params.gamma2,
        params.gamma2,
        params.gamma3,
        params.gamma3,
    ]
    .map(f64::sqrt);
    let s_out = Matrix6::from_fn(|r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        // g[r] * g[c] first keeps the result exactly symmetric.
        delta + 2.0 * (g[r] * g[c]) * herm[(r, c)].re
    });
    OutputSpectrum { s_out, asymmetry }
}

/// Symmetric angular-frequency grid in units of `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            min: -20.0,
            max: 20.0,
            points: 801,
        }
    }
}

impl FrequencyGrid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Contract(
                "frequency grid needs at least two points and min < max".into(),
            ));
        }
        Ok(())
    }

    /// Grid values scaled by `gamma1`.
    pub fn omegas(&self, gamma1: f64) -> Vec<f64> {
        let n = (self.points - 1) as f64;
        let centre = 0.5 * (self.min + self.max);
        let half = 0.5 * (self.max - self.min);
        (0..self.points)
            .map(|i| {
                // The integer numerator negates exactly, so symmetric grids mirror bit for bit.
                let w = centre + half * ((2 * i) as f64 - n) / n;
                w * gamma1
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub steady: SteadyStateSolution,
    pub drift: DriftMatrix,
    pub diffusion: DiffusionProduct,
    pub margin: f64,
    pub omegas: Vec<f64>,
    pub intracavity: Vec<CMatrix6>,
    pub output: Vec<Matrix6<f64>>,
    /// Largest anti-Hermitian residue across the grid.
    pub asymmetry: f64,
}

impl SpectrumResult {
    /// Output variance of quadrature `q` (0-based index into `(X1,Y1,X2,Y2,X3,Y3)`).
    pub fn variance(&self, q: usize) -> Vec<f64> {
        self.output.iter().map(|s| s[(q, q)]).collect()
    }
}

/// Full spectral sweep at the classical fixed point of `params`.
pub fn spectrum(params: &SystemParams, grid: &FrequencyGrid) -> Result<SpectrumResult> {
    grid.validate()?;
    let steady = solve_steady(params)?;
    let drift = drift_matrix(params, &steady);
    let diffusion = diffusion_product(params, &steady);
    let m = margin(&drift);
    if m <= STABILITY_TOL {
        return Err(Error::Unstable { margin: m });
    }
    let omegas = grid.omegas(params.gamma1.max(f64::MIN_POSITIVE));
    let points: Vec<(CMatrix6, OutputSpectrum)> = omegas
        .par_iter()
        .map(|&w| {
            let s = spectrum_unchecked(&drift, &diffusion, w);
            (s, output_spectra(params, &s))
        })
        .collect();
    let asymmetry = points.iter().map(|(_, o)| o.asymmetry).fold(0.0, f64::max);
    let (intracavity, output) = points.into_iter().map(|(s, o)| (s, o.s_out)).unzip();
    Ok(SpectrumResult {
        steady,
        drift,
        diffusion,
        margin: m,
        omegas,
        intracavity,
        output,
        asymmetry,
    })
}

/// Quadrature indices into the output covariance, modes numbered 1..=3.
pub fn x_index(mode: usize) -> usize {
    2 * (mode - 1)
}

pub fn y_index(mode: usize) -> usize {
    2 * (mode - 1) + 1
}

/// `V(X1 +- X2) + V(Y1 -+ Y2)` at each frequency; separable states give at least 4.
pub fn spectral_duan_simon(s_out: &[Matrix6<f64>], sign: Sign) -> Vec<f64> {
    let s = sign.factor();
    s_out
        .iter()
        .map(|m| {
            let vx = m[(0, 0)] + m[(2, 2)] + 2.0 * s * m[(0, 2)];
            let vy = m[(1, 1)] + m[(3, 3)] - 2.0 * s * m[(1, 3)];
            vx + vy
        })
        .collect()
}

/// Inferred-variance product for mode `j` given measurements on mode `k`.
pub fn inferred_product(m: &Matrix6<f64>, j: usize, k: usize) -> Result<f64> {
    let (xj, yj, xk, yk) = (x_index(j), y_index(j), x_index(k), y_index(k));
    for v in [m[(xk, xk)], m[(yk, yk)]] {
        if v <= EPR_VARIANCE_GUARD {
            return Err(Error::UndefinedEpr { variance: v });
        }
    }
    let vx = m[(xj, xj)] - m[(xj, xk)].powi(2) / m[(xk, xk)];
    let vy = m[(yj, yj)] - m[(yj, yk)].powi(2) / m[(yk, yk)];
    Ok(vx * vy)
}

/// EPR product `Vinf(Xj) Vinf(Yj)` across the grid; values below 1 mean `k` steers `j`.
pub fn spectral_epr(s_out: &[Matrix6<f64>], j: usize, k: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&j) || !(1..=3).contains(&k) || j == k {
        return Err(Error::Contract(format!("invalid EPR mode pair ({j}, {k})")));
    }
    s_out.iter().map(|m| inferred_product(m, j, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::solve_steady_symmetric;
    use approx::assert_abs_diff_eq;

    fn sym(eps: f64) -> SystemParams {
        SystemParams::symmetric(0.01, 1.0, 10.0, eps).unwrap()
    }

    #[test]
    fn empty_cavity_drift_is_diagonal_and_noise_free() {
        let p = sym(0.0);
        let s = solve_steady_symmetric(&p).unwrap();
        let a = drift_matrix(&p, &s).0;
        let diag = [1.0, 1.0, 1.0, 1.0, 10.0, 10.0];
        for r in 0..6 {
            for c in 0..6 {
                let e = if r == c { diag[r] } else { 0.0 };
                assert_eq!(a[(r, c)], Complex64::new(e, 0.0));
            }
        }
        assert_eq!(diffusion_product(&p, &s).0, CMatrix6::zeros());
        let res = spectrum(&p, &FrequencyGrid::default()).unwrap();
        for m in &res.output {
            assert_eq!(*m, Matrix6::identity());
        }
        assert!(res.intracavity.iter().all(|s| *s == CMatrix6::zeros()));
    }

    #[test]
    fn drift_entries_at_600() {
        let p = sym(600.0);
        let s = solve_steady_symmetric(&p).unwrap();
        let a = drift_matrix(&p, &s).0;
        assert_abs_diff_eq!(a[(0, 3)].re, 0.9483, epsilon = 2e-4);
        assert!(a.iter().all(|z| z.im == 0.0));
        let d = diffusion_product(&p, &s).0;
        assert_abs_diff_eq!(d[(0, 2)].re, -0.9483, epsilon = 2e-4);
    }

    #[test]
    fn diffusion_equals_noise_outer_product() {
        let mut p = sym(400.0);
        p.gamma2 = 3.0;
        p.eps2 = Complex64::new(250.0, 40.0);
        let s = solve_steady(&p).unwrap();
        let b = noise_matrix(&p, &s);
        let bbt = b * b.transpose();
        let d = diffusion_product(&p, &s).0;
        for (x, y) in bbt.iter().zip(d.iter()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
        }
        let rank = d.map(|z| z.norm()).iter().filter(|v| **v > 0.0).count();
        assert!(rank <= 4);
    }

    #[test]
    fn refuses_unstable_point() {
        let p = sym(1000.0);
        assert!(matches!(
            spectrum(&p, &FrequencyGrid::default()),
            Err(Error::Unstable { .. })
        ));
        let s = solve_steady(&p).unwrap();
        let err = intracavity_spectrum(&drift_matrix(&p, &s), &diffusion_product(&p, &s), 0.0);
        assert!(matches!(err, Err(Error::Unstable { .. })));
    }

    #[test]
    fn spectrum_decays_as_inverse_square() {
        let p = sym(400.0);
        let s = solve_steady(&p).unwrap();
        let (a, d) = (drift_matrix(&p, &s), diffusion_product(&p, &s));
        let n1 = intracavity_spectrum(&a, &d, 1e3).unwrap().norm();
        let n2 = intracavity_spectrum(&a, &d, 2e3).unwrap().norm();
        assert_abs_diff_eq!(n1 / n2, 4.0, epsilon = 1e-2);
    }

    #[test]
    fn grid_is_mirror_symmetric() {
        let w = FrequencyGrid::default().omegas(1.0);
        assert_eq!(w.len(), 801);
        assert_eq!(w[400], 0.0);
        for i in 0..w.len() {
            assert_eq!(w[i], -w[w.len() - 1 - i]);
        }
    }

    #[test]
    fn epr_guard_and_pair_validation() {
        let m = Matrix6::<f64>::zeros();
        assert!(matches!(
            inferred_product(&m, 1, 2),
            Err(Error::UndefinedEpr { .. })
        ));
        assert!(spectral_epr(&[Matrix6::identity()], 1, 1).is_err());
        assert_eq!(spectral_epr(&[Matrix6::identity()], 1, 2).unwrap(), vec![1.0]);
        assert_eq!(spectral_duan_simon(&[Matrix6::identity()], Sign::Plus), vec![4.0]);
    }
}
