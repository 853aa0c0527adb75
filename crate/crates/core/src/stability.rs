//! Linear stability of the classical fixed point and the critical operating point.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::spectral::{drift_matrix, numeric_eigenvalues};
use crate::steady::{solve_steady, SteadyStateSolution};

/// A fixed point is stable iff every drift eigenvalue has real part above this margin
/// (absolute, units of the loss rates).
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Eigenvalues of the drift matrix sorted by real, then imaginary part.
    pub eigenvalues: [Complex64; 6],
    pub stable: bool,
    /// Smallest real part among the eigenvalues.
    pub margin: f64,
    pub steady: SteadyStateSolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub alpha_c: f64,
    pub epsilon_c: f64,
    pub alpha3_c: f64,
}

/// Sort key used everywhere eigenvalue sets are compared.
pub fn sort_eigenvalues(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn require_symmetric(params: &SystemParams, what: &str) -> Result<()> {
    if params.is_symmetric() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} is only defined for gamma1 = gamma2 and eps1 = eps2"
        )))
    }
}

/// Critical pump at which the high-frequency amplitude reaches `-gamma/kappa`.
pub fn critical_point(params: &SystemParams) -> Result<CriticalPoint> {
    params.validate()?;
    require_symmetric(params, "the critical point")?;
    let (k, g, g3) = (params.kappa, params.gamma1, params.gamma3);
    let epsilon_c = 2.0 * g * (g * g3).sqrt() / k;
    Ok(CriticalPoint {
        alpha_c: epsilon_c / (2.0 * g),
        epsilon_c,
        alpha3_c: -g / k,
    })
}

/// Closed-form drift eigenvalues for the symmetric cavity with real amplitudes.
pub fn eigenvalues_symmetric(
    params: &SystemParams,
    ss: &SteadyStateSolution,
) -> Result<[Complex64; 6]> {
    require_symmetric(params, "the closed-form eigenvalue set")?;
    let amps = ss.amplitudes();
    if amps.iter().any(|z| z.im != 0.0) || ss.alpha1 != ss.alpha2 {
        return Err(Error::Contract(
            "closed-form eigenvalues need a real symmetric steady state".into(),
        ));
    }
    let (k, g, g3) = (params.kappa, params.gamma1, params.gamma3);
    let a = ss.alpha1.re;
    let a3 = ss.alpha3.re;
    let c = |x: f64| Complex64::new(x, 0.0);
    let quad = k * k * (a3 * a3 - 8.0 * a * a);
    let root_p = c((g - g3).powi(2) + 2.0 * k * a3 * (g - g3) + quad).sqrt();
    let root_m = c((g - g3).powi(2) - 2.0 * k * a3 * (g - g3) + quad).sqrt();
    let mut ev = [
        c(g + k * a3),
        c(g - k * a3),
        (c(g + g3 + k * a3) + root_p) * 0.5,
        (c(g + g3 + k * a3) - root_p) * 0.5,
        (c(g + g3 - k * a3) + root_m) * 0.5,
        (c(g + g3 - k * a3) - root_m) * 0.5,
    ];
    sort_eigenvalues(&mut ev);
    Ok(ev)
}

/// Stability of an already-solved fixed point.
pub fn stability_at(params: &SystemParams, steady: SteadyStateSolution) -> StabilityReport {
    let eigenvalues = numeric_eigenvalues(&drift_matrix(params, &steady).0);
    let margin = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    StabilityReport {
        eigenvalues,
        stable: margin > STABILITY_TOL,
        margin,
        steady,
    }
}

/// Numeric eigenvalue analysis at the classical fixed point.
pub fn stability(params: &SystemParams) -> Result<StabilityReport> {
    let steady = solve_steady(params)?;
    Ok(stability_at(params, steady))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryOutcome {
    /// Pump at which the stability margin crosses zero.
    Boundary(f64),
    /// No crossing: the whole pump range is stable.
    AllStable,
    /// No crossing: the whole pump range is unstable.
    AllUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub gamma3_over_gamma: f64,
    pub outcome: BoundaryOutcome,
}

/// Relative precision of the bisected boundary pump.
pub const BOUNDARY_RTOL: f64 = 1e-6;

fn is_increasing(xs: &[f64]) -> bool {
    !xs.is_empty() && xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[0] < w[1])
}

/// Locates the stable/unstable boundary in pump strength for each loss ratio.
pub fn stability_map(
    kappa: f64,
    gamma: f64,
    gamma3_over_gamma: &[f64],
    epsilon_range: (f64, f64),
) -> Result<Vec<BoundaryRow>> {
    let (lo, hi) = epsilon_range;
    if !is_increasing(gamma3_over_gamma) || !is_increasing(&[lo, hi]) || lo < 0.0 {
        return Err(Error::Contract(
            "loss-ratio grid and pump range must be nonempty and increasing".into(),
        ));
    }
    gamma3_over_gamma
        .iter()
        .map(|&ratio| {
            let margin = |eps: f64| -> Result<f64> {
                let p = SystemParams::symmetric(kappa, gamma, ratio * gamma, eps)?;
                Ok(stability(&p)?.margin)
            };
            let stable = |eps: f64| margin(eps).map(|m| m > STABILITY_TOL);
            let outcome = match (stable(lo)?, stable(hi)?) {
                (true, false) => {
                    let (mut a, mut b) = (lo, hi);
                    while b - a > BOUNDARY_RTOL * b {
                        let mid = 0.5 * (a + b);
                        if stable(mid)? {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    BoundaryOutcome::Boundary(0.5 * (a + b))
                }
                (true, true) => BoundaryOutcome::AllStable,
                (false, _) => BoundaryOutcome::AllUnstable,
            };
            Ok(BoundaryRow {
                gamma3_over_gamma: ratio,
                outcome,
            })
        })
        .collect()
}
