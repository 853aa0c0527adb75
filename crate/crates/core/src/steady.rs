//! Classical fixed points of the driven cavity.
//!
//! The symmetric cavity (`gamma1 = gamma2`, equal real pumps) reduces to a cubic in the
//! high-frequency amplitude,
//!
//! ```text
//! kappa^2 gamma3 a3^3 - 2 gamma gamma3 kappa a3^2 + gamma^2 gamma3 a3 + kappa eps^2 = 0,
//! a = eps / (gamma - kappa a3),
//! ```
//!
//! which is solved in closed form. The general case is solved numerically by pump
//! continuation from the empty cavity with Newton steps on the six real unknowns.

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Every returned fixed point satisfies the classical equations to this accuracy.
pub const RESIDUAL_TOL: f64 = 1e-10;

const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
const NEWTON_STEP_TOL: f64 = 1e-14;
const ITERATION_BUDGET: usize = 10_000;
const CONTINUATION_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    ClosedFormSymmetric,
    NumericGeneral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub alpha3: Complex64,
    pub residual: f64,
    pub method: SteadyMethod,
    /// All three roots of the cubic (closed-form path only).
    pub cubic_roots: Vec<Complex64>,
}

impl SteadyStateSolution {
    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }

    /// Mean intracavity photon numbers `|alpha_j|^2`.
    pub fn intensities(&self) -> [f64; 3] {
        [
            self.alpha1.norm_sqr(),
            self.alpha2.norm_sqr(),
            self.alpha3.norm_sqr(),
        ]
    }

    fn zero(method: SteadyMethod) -> Self {
        Self {
            alpha1: Complex64::default(),
            alpha2: Complex64::default(),
            alpha3: Complex64::default(),
            residual: 0.0,
            method,
            cubic_roots: Vec::new(),
        }
    }
}

/// The three roots of the steady-state cubic, principal real root first.
///
/// `xi` is the cube root appearing in the closed form; rotating it through the cube roots
/// of unity enumerates the remaining roots.
pub fn cubic_roots(kappa: f64, gamma: f64, gamma3: f64, eps: f64) -> [Complex64; 3] {
    let (k, g, g3) = (kappa, gamma, gamma3);
    let disc = 27.0 * g3.powi(4) * k.powi(8) * eps * eps * (27.0 * k * k * eps * eps + 4.0 * g3 * g.powi(3));
    let lead = -2.0 * g.powi(3) * g3.powi(3) * k.powi(3) - 27.0 * g3 * g3 * k.powi(5) * eps * eps;
    let xi0 = if disc >= 0.0 {
        Complex64::new((lead + disc.sqrt()).cbrt(), 0.0)
    } else {
        Complex64::new(lead, (-disc).sqrt()).powf(1.0 / 3.0)
    };
    let c1 = 16f64.cbrt() * g * g * g3;
    let c2 = 2f64.powf(2.0 / 3.0) / (g3 * k * k);
    let unity = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let root = |xi: Complex64| (4.0 * g / k + c1 / xi + c2 * xi) / 6.0;
    [root(xi0), root(xi0 * unity), root(xi0 * unity * unity)]
}

/// Closed-form fixed point of the symmetric cavity.
pub fn solve_steady_symmetric(params: &SystemParams) -> Result<SteadyStateSolution> {
    params.validate()?;
    if !params.is_symmetric() {
        return Err(Error::Contract(
            "closed-form steady state requires gamma1 = gamma2 and eps1 = eps2".into(),
        ));
    }
    let eps = params.eps1;
    if eps.im != 0.0 || eps.re < 0.0 {
        return Err(Error::Contract(format!(
            "closed-form steady state requires real eps >= 0, got {eps}"
        )));
    }
    let (k, g, g3, e) = (params.kappa, params.gamma1, params.gamma3, eps.re);
    if g <= 0.0 || g3 <= 0.0 {
        return Err(Error::Contract(
            "closed-form steady state requires gamma > 0 and gamma3 > 0".into(),
        ));
    }
    if e == 0.0 {
        let mut s = SteadyStateSolution::zero(SteadyMethod::ClosedFormSymmetric);
        s.cubic_roots = cubic_roots(k, g, g3, e).to_vec();
        return Ok(s);
    }

    let roots = cubic_roots(k, g, g3, e);
    let is_real = |z: &Complex64| z.im.abs() <= 1e-9 * z.norm().max(1.0);
    let real: Vec<f64> = roots.iter().filter(|z| is_real(z)).map(|z| z.re).collect();
    let candidates: Vec<f64> = if real.len() > 1 {
        // Several real roots: keep the branch connected to the empty cavity.
        real.iter()
            .copied()
            .filter(|&a3| a3 > -g / k && a3 <= 0.0)
            .collect()
    } else {
        real
    };

    // Cancellation in the closed form costs a few digits; two Newton steps on the cubic
    // restore full precision without changing the selected root.
    let cubic = |x: f64| ((k * k * g3 * x - 2.0 * g * g3 * k) * x + g * g * g3) * x + k * e * e;
    let slope = |x: f64| (3.0 * k * k * g3 * x - 4.0 * g * g3 * k) * x + g * g * g3;
    let polish = |mut x: f64| {
        for _ in 0..2 {
            let d = slope(x);
            if d != 0.0 {
                x -= cubic(x) / d;
            }
        }
        x
    };

    let mut best: Option<SteadyStateSolution> = None;
    for a3 in candidates.into_iter().map(polish) {
        let a = e / (g - k * a3);
        let amps = [
            Complex64::new(a, 0.0),
            Complex64::new(a, 0.0),
            Complex64::new(a3, 0.0),
        ];
        let residual = params.residual(amps);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(SteadyStateSolution {
                alpha1: amps[0],
                alpha2: amps[1],
                alpha3: amps[2],
                residual,
                method: SteadyMethod::ClosedFormSymmetric,
                cubic_roots: roots.to_vec(),
            });
        }
    }
    match best {
        Some(s) if s.residual < RESIDUAL_TOL => Ok(s),
        other => Err(Error::Inconsistent {
            residual: other.map_or(f64::INFINITY, |s| s.residual),
            candidates: roots.to_vec(),
        }),
    }
}

fn pack(a: [Complex64; 3]) -> Vector6<f64> {
    Vector6::new(a[0].re, a[0].im, a[1].re, a[1].im, a[2].re, a[2].im)
}

fn unpack(x: &Vector6<f64>) -> [Complex64; 3] {
    [
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], x[5]),
    ]
}

/// Real 6x6 Jacobian of the classical right-hand sides.
fn jacobian(p: &SystemParams, a: [Complex64; 3]) -> Matrix6<f64> {
    let k = p.kappa;
    let [a1, a2, a3] = a;
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    // d f_m / d(Re a_n), d f_m / d(Im a_n)
    let partials: [[Complex64; 6]; 3] = [
        [
            -p.gamma1 * one,
            -p.gamma1 * i,
            k * a3,
            -i * k * a3,
            k * a2.conj(),
            i * k * a2.conj(),
        ],
        [
            k * a3,
            -i * k * a3,
            -p.gamma2 * one,
            -p.gamma2 * i,
            k * a1.conj(),
            i * k * a1.conj(),
        ],
        [
            -k * a2,
            -i * k * a2,
            -k * a1,
            -i * k * a1,
            -p.gamma3 * one,
            -p.gamma3 * i,
        ],
    ];
    let mut j = Matrix6::zeros();
    for (m, row) in partials.iter().enumerate() {
        for (n, d) in row.iter().enumerate() {
            j[(2 * m, n)] = d.re;
            j[(2 * m + 1, n)] = d.im;
        }
    }
    j
}

struct Newton<'a> {
    params: &'a SystemParams,
    iterations: usize,
}

impl Newton<'_> {
    /// Newton iteration from `start`; returns the converged point or `None`.
    fn solve(&mut self, start: [Complex64; 3], max_iter: usize) -> Option<[Complex64; 3]> {
        let p = self.params;
        let mut x = pack(start);
        for _ in 0..max_iter {
            if self.iterations >= ITERATION_BUDGET {
                return None;
            }
            self.iterations += 1;
            let a = unpack(&x);
            let f = pack(p.classical_rhs(a));
            if f.amax() < NEWTON_RESIDUAL_TOL {
                return Some(a);
            }
            let dx = jacobian(p, a).lu().solve(&(-f))?;
            x += dx;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            if dx.amax() <= NEWTON_STEP_TOL * x.amax().max(1.0) {
                return Some(unpack(&x));
            }
        }
        let a = unpack(&x);
        (p.residual(a) < RESIDUAL_TOL).then_some(a)
    }
}

fn scaled(p: &SystemParams, s: f64) -> SystemParams {
    SystemParams {
        eps1: p.eps1 * s,
        eps2: p.eps2 * s,
        ..*p
    }
}

/// Damped fixed-point iteration of the classical equations.
fn damped_fixed_point(p: &SystemParams, start: [Complex64; 3], iters: usize) -> [Complex64; 3] {
    let k = p.kappa;
    let [mut a1, mut a2, mut a3] = start;
    for _ in 0..iters {
        let n3 = -k * a1 * a2 / p.gamma3;
        let n1 = (p.eps1 + k * a2.conj() * n3) / p.gamma1;
        let n2 = (p.eps2 + k * a1.conj() * n3) / p.gamma2;
        a1 = 0.5 * (a1 + n1);
        a2 = 0.5 * (a2 + n2);
        a3 = 0.5 * (a3 + n3);
    }
    [a1, a2, a3]
}

/// Numeric fixed point for arbitrary loss rates and complex pumps.
pub fn solve_steady_general(params: &SystemParams) -> Result<SteadyStateSolution> {
    params.validate()?;
    if params.gamma1 <= 0.0 || params.gamma2 <= 0.0 || params.gamma3 <= 0.0 {
        return Err(Error::Contract(
            "numeric steady state requires all loss rates > 0".into(),
        ));
    }
    let finish = |a: [Complex64; 3]| SteadyStateSolution {
        alpha1: a[0],
        alpha2: a[1],
        alpha3: a[2],
        residual: params.residual(a),
        method: SteadyMethod::NumericGeneral,
        cubic_roots: Vec::new(),
    };
    if params.eps1 == Complex64::default() && params.eps2 == Complex64::default() {
        return Ok(SteadyStateSolution::zero(SteadyMethod::NumericGeneral));
    }

    let mut newton = Newton {
        params,
        iterations: 0,
    };

    // Pump continuation from the empty cavity keeps the solver on the physical branch.
    let mut current = [Complex64::default(); 3];
    let mut s = 0.0;
    let mut ds = 1.0 / CONTINUATION_STEPS as f64;
    let mut continued = true;
    while s < 1.0 {
        let target = (s + ds).min(1.0);
        let stage = scaled(params, target);
        let mut stage_newton = Newton {
            params: &stage,
            iterations: newton.iterations,
        };
        let solved = stage_newton.solve(current, 50);
        newton.iterations = stage_newton.iterations;
        match solved {
            Some(a) => {
                current = a;
                s = target;
                ds = (ds * 1.5).min(0.25);
            }
            None => {
                ds *= 0.5;
                if ds < 1e-6 || newton.iterations >= ITERATION_BUDGET {
                    continued = false;
                    break;
                }
            }
        }
    }
    if continued {
        if let Some(a) = newton.solve(current, 20) {
            let sol = finish(a);
            if sol.residual < RESIDUAL_TOL {
                return Ok(sol);
            }
        }
    }

    // Fallback: relax towards a fixed point, then polish.
    let guess = [
        params.eps1 / params.gamma1,
        params.eps2 / params.gamma2,
        Complex64::default(),
    ];
    let relaxed = damped_fixed_point(params, guess, 2_000);
    let remaining = ITERATION_BUDGET.saturating_sub(newton.iterations + 2_000);
    newton.iterations = 0;
    let polished = newton.solve(relaxed, remaining.min(200));
    let last = polished.unwrap_or(relaxed);
    let sol = finish(last);
    if polished.is_some() && sol.residual < RESIDUAL_TOL {
        Ok(sol)
    } else {
        Err(Error::NoConvergence {
            iterations: ITERATION_BUDGET,
            residual: sol.residual,
            last,
        })
    }
}

/// Closed form when applicable, numeric otherwise.
pub fn solve_steady(params: &SystemParams) -> Result<SteadyStateSolution> {
    if params.is_symmetric() && params.eps1.im == 0.0 && params.eps1.re >= 0.0 {
        solve_steady_symmetric(params)
    } else {
        solve_steady_general(params)
    }
}
