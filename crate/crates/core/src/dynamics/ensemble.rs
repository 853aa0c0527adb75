use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::integrator::step;
use super::moments::{Batch, MomentTable};
use super::noise::NoiseStream;
use super::{PhaseSpacePoint, TrajectoryConfig, MAX_DIVERGED_FRACTION, NUM_BATCHES};

fn check_init(init: &PhaseSpacePoint) -> Result<()> {
    if !init.is_finite() {
        return Err(Error::Contract("initial state must be finite".into()));
    }
    Ok(())
}

/// Integrates one trajectory into `buf`; returns `false` if it diverged.
fn trajectory(
    params: &SystemParams,
    init: &PhaseSpacePoint,
    cfg: &TrajectoryConfig,
    raw_dt: f64,
    index: u64,
    buf: &mut [PhaseSpacePoint],
) -> bool {
    let mut noise = NoiseStream::new(cfg.seed, index);
    let mut x = *init;
    buf[0] = x;
    for slot in buf[1..].iter_mut() {
        for _ in 0..cfg.sample_stride {
            x = step(params, &x, raw_dt, noise.next_step());
            if x.diverged() {
                return false;
            }
        }
        *slot = x;
    }
    true
}

/// Trajectory index range of batch `b` out of `n_batches` for `n` trajectories.
fn batch_range(b: usize, n_batches: usize, n: usize) -> std::ops::Range<usize> {
    b * n / n_batches..(b + 1) * n / n_batches
}

/// Runs `cfg.n_traj` positive-P trajectories from the point `init` and averages their moments.
///
/// Trajectory `i` draws its noise from `(cfg.seed, i)` and trajectories are summed in
/// index order within fixed batches, so the table is bit-identical for any thread count.
pub fn run_ensemble(
    params: &SystemParams,
    init: &PhaseSpacePoint,
    cfg: &TrajectoryConfig,
) -> Result<MomentTable> {
    params.validate()?;
    cfg.validate()?;
    check_init(init)?;
    let raw_dt = cfg.raw_dt(params, init)?;
    let n_samples = cfg.n_samples();
    let n_batches = NUM_BATCHES.min(cfg.n_traj);

    let batches: Vec<Batch> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut batch = Batch::new(n_samples);
            let mut buf = vec![PhaseSpacePoint::default(); n_samples];
            for i in batch_range(b, n_batches, cfg.n_traj) {
                if trajectory(params, init, cfg, raw_dt, i as u64, &mut buf) {
                    batch.push(&buf);
                } else {
                    batch.diverged += 1;
                }
            }
            batch
        })
        .collect();

    let n_diverged: usize = batches.iter().map(|b| b.diverged).sum();
    if n_diverged as f64 > MAX_DIVERGED_FRACTION * cfg.n_traj as f64 {
        return Err(Error::EnsembleQuality {
            diverged: n_diverged,
            total: cfg.n_traj,
        });
    }
    Ok(MomentTable {
        times: cfg.sample_times(),
        n_traj: cfg.n_traj,
        n_diverged,
        batches,
    })
}

/// Noise-free path on the sample grid of a [`TrajectoryConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalPath {
    pub times: Vec<f64>,
    pub points: Vec<PhaseSpacePoint>,
}

/// Integrates the mean-field equations (noise dropped) with the ensemble integrator.
pub fn semiclassical_trajectory(
    params: &SystemParams,
    init: &PhaseSpacePoint,
    cfg: &TrajectoryConfig,
) -> Result<SemiclassicalPath> {
    params.validate()?;
    check_init(init)?;
    // n_traj is irrelevant here.
    TrajectoryConfig { n_traj: 2, ..*cfg }.validate()?;
    let raw_dt = cfg.raw_dt(params, init)?;
    let mut points = Vec::with_capacity(cfg.n_samples());
    let mut x = *init;
    points.push(x);
    for _ in 1..cfg.n_samples() {
        for _ in 0..cfg.sample_stride {
            x = step(params, &x, raw_dt, [0.0; 4]);
            if x.diverged() {
                return Err(Error::EnsembleQuality {
                    diverged: 1,
                    total: 1,
                });
            }
        }
        points.push(x);
    }
    Ok(SemiclassicalPath {
        times: cfg.sample_times(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IntegrationMode, Var};
    use num_complex::Complex64;

    fn cfg(n_traj: usize) -> TrajectoryConfig {
        TrajectoryConfig {
            dt: 1e-3,
            t_max: 0.1,
            sample_stride: 20,
            n_traj,
            seed: 9,
            mode: IntegrationMode::Cavity,
        }
    }

    #[test]
    fn batches_partition_the_ensemble() {
        for n in [2, 7, 64, 65, 1000] {
            let nb = NUM_BATCHES.min(n);
            let mut next = 0;
            for b in 0..nb {
                let r = batch_range(b, nb, n);
                assert_eq!(r.start, next);
                assert!(!r.is_empty());
                next = r.end;
            }
            assert_eq!(next, n);
        }
    }

    #[test]
    fn vacuum_ensemble_stays_empty() {
        let p = SystemParams::symmetric(0.01, 1.0, 10.0, 0.0).unwrap();
        let t = run_ensemble(&p, &PhaseSpacePoint::vacuum(), &cfg(10)).unwrap();
        assert_eq!(t.included(), 10);
        for s in 0..t.len() {
            assert!(t.means(s).0.iter().all(|z| *z == Complex64::default()));
        }
    }

    #[test]
    fn first_sample_is_the_initial_state() {
        let p = SystemParams::symmetric(0.01, 1.0, 10.0, 100.0).unwrap();
        let a = Complex64::new(3.0, -1.0);
        let init = PhaseSpacePoint::coherent(a, a, Complex64::default());
        let t = run_ensemble(&p, &init, &cfg(5)).unwrap();
        let m = t.means(0);
        assert!((m.mean(Var::A1) - a).norm() < 1e-15);
        assert!((m.mean(Var::A2p) - a.conj()).norm() < 1e-15);
    }

    #[test]
    fn unpumped_mean_field_decays_at_loss_rates() {
        let p = SystemParams::new(
            0.01,
            1.0,
            2.0,
            5.0,
            Complex64::default(),
            Complex64::default(),
        )
        .unwrap();
        let init = PhaseSpacePoint::coherent(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        );
        let c = TrajectoryConfig {
            t_max: 1.0,
            ..cfg(2)
        };
        let path = semiclassical_trajectory(&p, &init, &c).unwrap();
        let end = path.points.last().unwrap();
        // Couplings are O(kappa) and the amplitudes O(1): pure exponential decay to 1e-3.
        assert!((end.a1.re - (-1.0f64).exp()).abs() < 1e-3);
        assert!((end.a2.im - (-2.0f64).exp()).abs() < 1e-3);
        assert!((end.a3.re + (-5.0f64).exp()).abs() < 1e-3);
    }
}
