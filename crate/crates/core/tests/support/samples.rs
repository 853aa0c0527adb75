//! Moment tables built from explicitly sampled phase-space points.

use num_complex::Complex64;
use sfg_core::dynamics::noise::NoiseStream;
use sfg_core::dynamics::{Batch, MomentTable, PhaseSpacePoint};

/// One-sample-time table of `n` points drawn by `draw(index, normals)`, in 64 batches.
pub fn table(n: usize, seed: u64, draw: impl Fn(&mut NoiseStream) -> PhaseSpacePoint) -> MomentTable {
    let nb = 64.min(n);
    let batches = (0..nb)
        .map(|b| {
            let mut batch = Batch::new(1);
            for i in b * n / nb..(b + 1) * n / nb {
                let mut noise = NoiseStream::new(seed, i as u64);
                batch.push(&[draw(&mut noise)]);
            }
            batch
        })
        .collect();
    MomentTable {
        times: vec![0.0],
        n_traj: n,
        n_diverged: 0,
        batches,
    }
}

/// Complex Gaussian with `E|z|^2 = nbar` (thermal Glauber-P sample).
pub fn thermal(noise: &mut NoiseStream, nbar: f64) -> Complex64 {
    let g = noise.next_step();
    Complex64::new(g[0], g[1]) * (nbar / 2.0).sqrt()
}

/// One-sample-time table of the given points, split into 64 contiguous batches.
pub fn table_of(points: &[PhaseSpacePoint]) -> MomentTable {
    let n = points.len();
    let nb = 64.min(n);
    let batches = (0..nb)
        .map(|b| {
            let mut batch = Batch::new(1);
            for x in &points[b * n / nb..(b + 1) * n / nb] {
                batch.push(&[*x]);
            }
            batch
        })
        .collect();
    MomentTable {
        times: vec![0.0],
        n_traj: n,
        n_diverged: 0,
        batches,
    }
}
