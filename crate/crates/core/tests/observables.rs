mod support;

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use nalgebra::Matrix6;
use num_complex::Complex64;
use sfg_core::dynamics::{run_ensemble, IntegrationMode, MomentTable, PhaseSpacePoint, TrajectoryConfig};
use sfg_core::observables::{
    duan_simon, epr_product, fano_mode, fano_sum, quadrature_covariance, quadrature_variance,
    CorrelationSeries, QuadratureSpec, Sign,
};
use sfg_core::spectral::{drift_matrix, inferred_product, noise_matrix, quadrature_transform};
use sfg_core::steady::solve_steady;
use sfg_core::SystemParams;
use support::ou::OuProcess;
use support::samples::{table, table_of, thermal};

fn x(j: usize) -> QuadratureSpec {
    QuadratureSpec::x(j).unwrap()
}

fn y(j: usize) -> QuadratureSpec {
    QuadratureSpec::y(j).unwrap()
}

fn within(s: &CorrelationSeries, i: usize, expect: f64, n_se: f64) -> bool {
    (s.values[i] - expect).abs() <= n_se * s.se[i] + 1e-12 * expect.abs().max(1.0)
}

/// Stationary linearized fluctuations about a steady state, sampled directly, together
/// with their exact normally ordered quadrature covariance `U C U^T`.
fn gaussian_case(p: &SystemParams, n: usize, seed: u64) -> (MomentTable, Matrix6<f64>) {
    let s = solve_steady(p).unwrap();
    let process = OuProcess::new(&drift_matrix(p, &s).0, &noise_matrix(p, &s), 0.1);
    let centre = PhaseSpacePoint::coherent(s.alpha1, s.alpha2, s.alpha3).to_array();
    let mut points = Vec::with_capacity(n);
    for i in 0..n as u64 {
        process.path(1, seed, i, |_, dx| {
            points.push(PhaseSpacePoint::from_array(std::array::from_fn(|k| centre[k] + dx[k])));
        });
    }
    let u = quadrature_transform();
    let q = u * process.complex_covariance() * u.transpose();
    (table_of(&points), q.map(|z| z.re))
}

#[test]
fn gaussian_observables_match_closed_forms() {
    let cases = [
        SystemParams::symmetric(0.01, 1.0, 10.0, 400.0).unwrap(),
        SystemParams::new(0.01, 1.0, 40.0, 2.0, Complex64::new(400.0, 0.0), Complex64::new(2400.0, 0.0)).unwrap(),
    ];
    for (c, p) in cases.iter().enumerate() {
        let (m, q) = gaussian_case(p, 20_000, 40 + c as u64);
        let shot = Matrix6::<f64>::identity() + q;
        for j in 1..=3 {
            let (ix, iy) = (2 * (j - 1), 2 * (j - 1) + 1);
            let vx = quadrature_variance(&m, x(j)).unwrap();
            let vy = quadrature_variance(&m, y(j)).unwrap();
            assert!(within(&vx, 0, shot[(ix, ix)], 3.0), "case {c} V(X{j}) {vx:?} vs {}", shot[(ix, ix)]);
            assert!(within(&vy, 0, shot[(iy, iy)], 3.0), "case {c} V(Y{j}) {vy:?} vs {}", shot[(iy, iy)]);
        }
        let cx = quadrature_covariance(&m, x(1), x(2)).unwrap();
        let cy = quadrature_covariance(&m, y(1), y(2)).unwrap();
        assert!(within(&cx, 0, q[(0, 2)], 3.0), "case {c} cov X {cx:?} vs {}", q[(0, 2)]);
        assert!(within(&cy, 0, q[(1, 3)], 3.0), "case {c} cov Y {cy:?} vs {}", q[(1, 3)]);
        for sign in [Sign::Plus, Sign::Minus] {
            let f = sign.factor();
            let expect = shot[(0, 0)] + shot[(2, 2)] + 2.0 * f * q[(0, 2)] + shot[(1, 1)] + shot[(3, 3)] - 2.0 * f * q[(1, 3)];
            let d = duan_simon(&m, sign).unwrap();
            assert!(within(&d, 0, expect, 3.0), "case {c} DS {sign:?} {d:?} vs {expect}");
        }
        for (j, k) in [(1, 2), (2, 1)] {
            let expect = inferred_product(&shot, j, k).unwrap();
            let e = epr_product(&m, j, k).unwrap();
            assert!(within(&e, 0, expect, 3.0), "case {c} EPR{j}{k} {e:?} vs {expect}");
        }
    }
}

#[test]
fn displaced_thermal_fano_factors() {
    let (b1, b2, n1, n2) = (Complex64::new(4.0, 1.0), Complex64::new(-2.0, 0.0), 3.0, 0.5);
    let m = table(40_000, 8, |s| {
        let a1 = b1 + thermal(s, n1);
        let a2 = b2 + thermal(s, n2);
        PhaseSpacePoint::coherent(a1, a2, Complex64::default())
    });
    let var = |b: Complex64, n: f64| 2.0 * b.norm_sqr() * n + n * n;
    let mean = |b: Complex64, n: f64| b.norm_sqr() + n;
    let f1 = fano_mode(&m, 1).unwrap();
    assert!(within(&f1, 0, 1.0 + var(b1, n1) / mean(b1, n1), 3.0), "{f1:?}");
    let f2 = fano_mode(&m, 2).unwrap();
    assert!(within(&f2, 0, 1.0 + var(b2, n2) / mean(b2, n2), 3.0), "{f2:?}");
    let fs = fano_sum(&m).unwrap();
    let expect = 1.0 + (var(b1, n1) + var(b2, n2)) / (mean(b1, n1) + mean(b2, n2));
    assert!(within(&fs, 0, expect, 3.0), "{fs:?} vs {expect}");
    // Thermal quadrature noise: V = 1 + 2 nbar.
    let v = quadrature_variance(&m, QuadratureSpec::new(1, 0.4).unwrap()).unwrap();
    assert!(within(&v, 0, 1.0 + 2.0 * n1, 3.0), "{v:?}");
}

#[test]
fn independent_modes_are_uncorrelated() {
    let m = table(20_000, 9, |s| {
        PhaseSpacePoint::coherent(
            Complex64::new(1.0, 0.0) + thermal(s, 1.0),
            Complex64::new(0.0, 2.0) + thermal(s, 2.0),
            thermal(s, 0.3),
        )
    });
    for (a, b) in [(x(1), x(2)), (y(1), y(2)), (x(1), y(3)), (QuadratureSpec::new(2, 1.0).unwrap(), x(3))] {
        let c = quadrature_covariance(&m, a, b).unwrap();
        assert!(within(&c, 0, 0.0, 5.0), "{a:?} {b:?}: {c:?}");
    }
    let e = epr_product(&m, 1, 2).unwrap();
    // No inference power: the product equals V(X1) V(Y1) = (1 + 2)^2.
    assert!(within(&e, 0, 9.0, 5.0), "{e:?}");
}

fn tw_table() -> &'static MomentTable {
    static T: OnceLock<MomentTable> = OnceLock::new();
    T.get_or_init(|| {
        let a = Complex64::new(1000.0 / 2f64.sqrt(), 0.0);
        let cfg = TrajectoryConfig {
            dt: 5e-4,
            t_max: 4.0,
            sample_stride: 100,
            n_traj: 3000,
            seed: 31,
            mode: IntegrationMode::TravellingWave,
        };
        run_ensemble(
            &SystemParams::travelling_wave(0.01).unwrap(),
            &PhaseSpacePoint::coherent(a, a, Complex64::default()),
            &cfg,
        )
        .unwrap()
    })
}

fn first_below(s: &CorrelationSeries) -> Option<usize> {
    (0..s.len()).find(|&i| s.below(i, 3.0))
}

#[test]
fn travelling_wave_squeezes_the_sum_frequency_mode_early() {
    let m = tw_table();
    let v = quadrature_variance(m, x(3)).unwrap();
    let peak = (0..m.len()).max_by(|&a, &b| m.means(a).intensity(3).re.total_cmp(&m.means(b).intensity(3).re)).unwrap();
    let i = first_below(&v).expect("no squeezing");
    assert!(i < peak, "squeezing first at {} after peak {}", m.times[i], m.times[peak]);
}

#[test]
fn travelling_wave_photon_statistics() {
    let m = tw_table();
    let f = fano_sum(m).unwrap();
    let i = first_below(&f).expect("no sub-Poissonian statistics");
    assert!(m.times[i] < 1.0);
    // Individual low-frequency modes end up super-Poissonian.
    let f1 = fano_mode(m, 1).unwrap();
    let last = f1.len() - 1;
    assert!(f1.values[last] - 3.0 * f1.se[last] > 1.0, "{} ± {}", f1.values[last], f1.se[last]);
}

#[test]
fn travelling_wave_entanglement_and_steering() {
    let m = tw_table();
    let plus = duan_simon(m, Sign::Plus).unwrap();
    let minus = duan_simon(m, Sign::Minus).unwrap();
    let e12 = epr_product(m, 1, 2).unwrap();
    let e21 = epr_product(m, 2, 1).unwrap();
    let cov = quadrature_covariance(m, x(1), x(2)).unwrap();
    assert!(first_below(&plus).is_some());
    assert!(first_below(&e12).is_some());
    assert!((1..m.len()).any(|i| cov.values[i] + 3.0 * cov.se[i] < 0.0));
    for i in 0..m.len() {
        assert!(minus.values[i] + 3.0 * minus.se[i] >= 4.0, "t={}: {}", m.times[i], minus.values[i]);
        // EPR steering implies entanglement.
        if e12.below(i, 3.0) {
            assert!(plus.below(i, 3.0), "t={}", m.times[i]);
        }
        let se = e12.se[i].hypot(e21.se[i]);
        assert!((e12.values[i] - e21.values[i]).abs() <= 5.0 * se + 1e-9, "t={}", m.times[i]);
    }
}

#[test]
fn exchange_symmetry_and_uncertainty() {
    let m = tw_table();
    let pairs = [
        (quadrature_variance(m, x(1)).unwrap(), quadrature_variance(m, x(2)).unwrap()),
        (quadrature_variance(m, y(1)).unwrap(), quadrature_variance(m, y(2)).unwrap()),
        (fano_mode(m, 1).unwrap(), fano_mode(m, 2).unwrap()),
    ];
    for (a, b) in &pairs {
        for i in 0..m.len() {
            let se = a.se[i].hypot(b.se[i]);
            assert!((a.values[i] - b.values[i]).abs() <= 5.0 * se + 1e-9 * a.values[i].abs(), "t={}", m.times[i]);
        }
    }
    for j in 1..=3 {
        for theta in [0.0, 0.4, 1.1] {
            let a = quadrature_variance(m, QuadratureSpec::new(j, theta).unwrap()).unwrap();
            let b = quadrature_variance(m, QuadratureSpec::new(j, theta + FRAC_PI_2).unwrap()).unwrap();
            for i in 0..m.len() {
                let sum = a.values[i] + b.values[i];
                assert!(sum + 3.0 * a.se[i].hypot(b.se[i]) >= 2.0, "mode {j} theta {theta} t={}: {sum}", m.times[i]);
            }
        }
    }
}

#[test]
fn covariance_is_variance_minus_one() {
    let m = tw_table();
    let q = QuadratureSpec::new(3, 0.25).unwrap();
    let c = quadrature_covariance(m, q, q).unwrap();
    let v = quadrature_variance(m, q).unwrap();
    for i in 0..m.len() {
        assert!((c.values[i] + 1.0 - v.values[i]).abs() < 1e-9 * v.values[i].abs().max(1.0));
    }
}
