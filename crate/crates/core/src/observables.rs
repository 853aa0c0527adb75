//! Physical correlations from normally ordered stochastic moments.
//!
//! The dynamics module stores raw stochastic averages only; every ordering correction
//! (the `+1` of quadrature variances, the `+mean` of the Fano factor) lives here.
//! Standard errors come from the batch means by a first-order delta method.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::dynamics::{MomentTable, Moments, Var};
use crate::error::{Error, Result};

/// Absolute guard on the mean intensity entering a Fano factor.
pub const FANO_MEAN_GUARD: f64 = 1e-6;

/// Guard on the steering-mode variances of an EPR product.
pub const EPR_GUARD: f64 = 1e-9;

/// Relative part of the tolerance on imaginary residues.
pub const IMAG_RTOL: f64 = 1e-8;

/// Standard errors of slack allowed in the imaginary residue.
pub const IMAG_SE_FACTOR: f64 = 5.0;

/// Relative step of the central differences used for error propagation.
const DELTA_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Quadrature `x(theta) = a e^{-i theta} + a+ e^{i theta}` of mode 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub mode: usize,
    /// Reduced to `[0, 2 pi)`.
    pub theta: f64,
}

impl QuadratureSpec {
    pub fn new(mode: usize, theta: f64) -> Result<Self> {
        if !(1..=3).contains(&mode) {
            return Err(Error::Contract(format!("quadrature mode {mode} not in 1..=3")));
        }
        if !theta.is_finite() {
            return Err(Error::Contract("quadrature angle must be finite".into()));
        }
        Ok(Self {
            mode,
            theta: theta.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub fn x(mode: usize) -> Result<Self> {
        Self::new(mode, 0.0)
    }

    pub fn y(mode: usize) -> Result<Self> {
        Self::new(mode, FRAC_PI_2)
    }

    /// `e^{-i theta}`, exact at multiples of `pi/2`.
    pub fn phase(&self) -> Complex64 {
        let quarter = self.theta / FRAC_PI_2;
        let k = quarter.round();
        if (quarter - k).abs() < 1e-12 {
            match (k as i64).rem_euclid(4) {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            }
        } else {
            Complex64::from_polar(1.0, -self.theta)
        }
    }

    fn vars(&self) -> (Var, Var) {
        (Var::amp(self.mode), Var::plus(self.mode))
    }
}

/// A real correlation on the sample grid with its standard error and decision threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub se: Vec<f64>,
    pub threshold: f64,
}

impl CorrelationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when sample `i` lies below the threshold by more than `n_se` standard errors.
    pub fn below(&self, i: usize, n_se: f64) -> bool {
        self.values[i] + n_se * self.se[i] < self.threshold
    }

    /// Series divided by its threshold, errors scaled alike.
    pub fn normalized(&self) -> CorrelationSeries {
        let t = self.threshold;
        CorrelationSeries {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v / t).collect(),
            se: self.se.iter().map(|s| s / t).collect(),
            threshold: 1.0,
        }
    }
}

/// Evaluates `f` on the grand means and propagates batch scatter through it.
///
/// Returns the value with separate standard errors of its real and imaginary parts.
fn delta_estimate(
    grand: &Moments,
    batches: &[Moments],
    f: impl Fn(&Moments) -> Complex64,
) -> (Complex64, f64, f64) {
    let value = f(grand);
    let nb = batches.len() as f64;
    let (mut sre, mut sim) = (0.0, 0.0);
    for b in batches {
        let up = f(&grand.toward(b, DELTA_STEP));
        let down = f(&grand.toward(b, -DELTA_STEP));
        let d = (up - down) / (2.0 * DELTA_STEP);
        sre += d.re * d.re;
        sim += d.im * d.im;
    }
    let norm = nb * (nb - 1.0);
    (value, (sre / norm).sqrt(), (sim / norm).sqrt())
}

fn real_part(value: Complex64, se_im: f64) -> Result<f64> {
    let tolerance = IMAG_RTOL * value.re.abs().max(1.0) + IMAG_SE_FACTOR * se_im;
    if value.im.abs() > tolerance || !value.re.is_finite() {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            tolerance,
        });
    }
    Ok(value.re)
}

/// Builds a series from a moment functional; `guard` is checked on the grand means only.
fn series(
    m: &MomentTable,
    threshold: f64,
    guard: impl Fn(&Moments) -> Result<()>,
    f: impl Fn(&Moments) -> Complex64,
) -> Result<CorrelationSeries> {
    let mut values = Vec::with_capacity(m.len());
    let mut se = Vec::with_capacity(m.len());
    for s in 0..m.len() {
        let grand = m.means(s);
        let batches = m.batch_means(s);
        if batches.len() < 2 {
            return Err(Error::Contract(
                "standard errors need at least two non-empty batches".into(),
            ));
        }
        guard(&grand)?;
        let (v, se_re, se_im) = delta_estimate(&grand, &batches, &f);
        values.push(real_part(v, se_im)?);
        se.push(se_re);
    }
    Ok(CorrelationSeries {
        times: m.times.clone(),
        values,
        se,
        threshold,
    })
}

fn no_guard(_: &Moments) -> Result<()> {
    Ok(())
}

/// Raw stochastic covariance of two quadrature variables.
fn raw_covariance(m: &Moments, qj: &QuadratureSpec, qk: &QuadratureSpec) -> Complex64 {
    let (aj, pj) = qj.vars();
    let (ak, pk) = qk.vars();
    let (ej, ek) = (qj.phase(), qk.phase());
    let cov = |u: Var, v: Var| m.second(u, v) - m.mean(u) * m.mean(v);
    cov(aj, ak) * ej * ek
        + cov(aj, pk) * ej * ek.conj()
        + cov(pj, ak) * ej.conj() * ek
        + cov(pj, pk) * ej.conj() * ek.conj()
}

fn variance(m: &Moments, q: &QuadratureSpec) -> Complex64 {
    1.0 + raw_covariance(m, q, q)
}

fn inferred(m: &Moments, j: &QuadratureSpec, k: &QuadratureSpec) -> Complex64 {
    let c = raw_covariance(m, j, k);
    variance(m, j) - c * c / variance(m, k)
}

/// Normally ordered quadrature variance; coherent states give 1, squeezing is below 1.
pub fn quadrature_variance(m: &MomentTable, q: QuadratureSpec) -> Result<CorrelationSeries> {
    series(m, 1.0, no_guard, |x| variance(x, &q))
}

/// Stochastic covariance of `qj` and `qk`.
///
/// Exact for distinct modes. For a single mode it omits the commutator, so
/// `quadrature_covariance(q, q) + 1 == quadrature_variance(q)`.
pub fn quadrature_covariance(
    m: &MomentTable,
    qj: QuadratureSpec,
    qk: QuadratureSpec,
) -> Result<CorrelationSeries> {
    series(m, 0.0, no_guard, |x| raw_covariance(x, &qj, &qk))
}

/// Mean photon number `E[n_j]` of mode `j`.
pub fn mean_intensity(m: &MomentTable, mode: usize) -> Result<CorrelationSeries> {
    if !(1..=3).contains(&mode) {
        return Err(Error::Contract(format!("mode {mode} not in 1..=3")));
    }
    series(m, 0.0, no_guard, |x| x.intensity(mode))
}

fn fano_guard(mean: Complex64) -> Result<()> {
    if !(mean.re >= FANO_MEAN_GUARD) {
        return Err(Error::UndefinedFano { mean: mean.re });
    }
    Ok(())
}

/// Fano factor of the total low-frequency photon number `N1 + N2`.
pub fn fano_sum(m: &MomentTable) -> Result<CorrelationSeries> {
    let mean = |x: &Moments| x.intensity(1) + x.intensity(2);
    series(
        m,
        1.0,
        |x| fano_guard(mean(x)),
        |x| {
            let n = mean(x);
            1.0 + (x.sum12_sq() - n * n) / n
        },
    )
}

/// Fano factor of a single mode.
pub fn fano_mode(m: &MomentTable, mode: usize) -> Result<CorrelationSeries> {
    if !(1..=3).contains(&mode) {
        return Err(Error::Contract(format!("mode {mode} not in 1..=3")));
    }
    series(
        m,
        1.0,
        |x| fano_guard(x.intensity(mode)),
        |x| {
            let n = x.intensity(mode);
            1.0 + (x.nn(mode, mode) - n * n) / n
        },
    )
}

/// `V(X1 +- X2) + V(Y1 -+ Y2)`; values below 4 certify entanglement of modes 1 and 2.
pub fn duan_simon(m: &MomentTable, sign: Sign) -> Result<CorrelationSeries> {
    let s = sign.factor();
    let (x1, x2) = (QuadratureSpec::x(1)?, QuadratureSpec::x(2)?);
    let (y1, y2) = (QuadratureSpec::y(1)?, QuadratureSpec::y(2)?);
    series(m, 4.0, no_guard, |x| {
        variance(x, &x1) + variance(x, &x2) + 2.0 * s * raw_covariance(x, &x1, &x2)
            + variance(x, &y1)
            + variance(x, &y2)
            - 2.0 * s * raw_covariance(x, &y1, &y2)
    })
}

/// `Vinf(Xj) Vinf(Yj)` inferred from measurements on mode `k`; below 1 means `k` steers `j`.
pub fn epr_product(m: &MomentTable, j: usize, k: usize) -> Result<CorrelationSeries> {
    if j == k {
        return Err(Error::Contract(format!("EPR product needs distinct modes, got ({j}, {k})")));
    }
    let (xj, yj) = (QuadratureSpec::x(j)?, QuadratureSpec::y(j)?);
    let (xk, yk) = (QuadratureSpec::x(k)?, QuadratureSpec::y(k)?);
    series(
        m,
        1.0,
        |x| {
            for v in [variance(x, &xk).re, variance(x, &yk).re] {
                if !(v > EPR_GUARD) {
                    return Err(Error::UndefinedEpr { variance: v });
                }
            }
            Ok(())
        },
        |x| inferred(x, &xj, &xk) * inferred(x, &yj, &yk),
    )
}
