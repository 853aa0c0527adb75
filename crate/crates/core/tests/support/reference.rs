//! Straight-line scalar re-implementation of the ensemble, one trajectory at a time.

use num_complex::Complex64;
use sfg_core::dynamics::integrator::principal_sqrt;
use sfg_core::dynamics::noise::noise_at;
use sfg_core::dynamics::{PhaseSpacePoint, TrajectoryConfig};
use sfg_core::SystemParams;

type State = [Complex64; 6];

fn rhs(p: &SystemParams, x: &State, dw: [f64; 4], dt: f64) -> State {
    let k = p.kappa;
    let drift = [
        p.eps1 - p.gamma1 * x[0] + k * x[3] * x[4],
        p.eps1.conj() - p.gamma1 * x[1] + k * x[2] * x[5],
        p.eps2 - p.gamma2 * x[2] + k * x[1] * x[4],
        p.eps2.conj() - p.gamma2 * x[3] + k * x[0] * x[5],
        -p.gamma3 * x[4] - k * x[0] * x[2],
        -p.gamma3 * x[5] - k * x[1] * x[3],
    ];
    let s = principal_sqrt(k * x[4] * 0.5);
    let sp = principal_sqrt(k * x[5] * 0.5);
    let noise = [
        s * Complex64::new(dw[0], dw[2]),
        sp * Complex64::new(dw[1], dw[3]),
        s * Complex64::new(dw[0], -dw[2]),
        sp * Complex64::new(dw[1], -dw[3]),
        Complex64::default(),
        Complex64::default(),
    ];
    std::array::from_fn(|i| drift[i] * dt + noise[i])
}

pub fn step(p: &SystemParams, x: &State, dt: f64, n: [f64; 4]) -> State {
    let sq = dt.sqrt();
    let dw = n.map(|v| v * sq);
    let mut mid = *x;
    for _ in 0..3 {
        let inc = rhs(p, &mid, dw, dt);
        mid = std::array::from_fn(|i| x[i] + 0.5 * inc[i]);
    }
    std::array::from_fn(|i| 2.0 * mid[i] - x[i])
}

/// Samples of trajectory `index` on the configured grid, using random-access noise.
pub fn trajectory(p: &SystemParams, init: &PhaseSpacePoint, cfg: &TrajectoryConfig, raw_dt: f64, index: u64) -> Vec<State> {
    let mut x = init.to_array();
    let mut out = vec![x];
    let mut n = 0u64;
    for _ in 1..cfg.n_samples() {
        for _ in 0..cfg.sample_stride {
            x = step(p, &x, raw_dt, noise_at(cfg.seed, index, n));
            n += 1;
        }
        out.push(x);
    }
    out
}
