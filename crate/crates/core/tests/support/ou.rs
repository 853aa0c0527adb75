//! Direct simulation of the linearized fluctuation process, used as an independent
//! estimate of the spectral matrix.
//!
//! The complex process `d(dX) = -A dX dt + B dW` is rewritten over 12 real coordinates
//! `(Re dX, Im dX)`. Trajectories start from the exact stationary distribution and advance
//! with the exact one-step transition, so the only approximations are the finite record
//! length (relative bias about `1 / (lambda_min T)`) and aliasing beyond `pi / dt`.

use nalgebra::{DMatrix, DVector, Matrix6, SMatrix, SVector};
use num_complex::Complex64;
use sfg_core::dynamics::noise::NoiseStream;
use sfg_core::spectral::{output_spectra, CMatrix6};
use sfg_core::SystemParams;

pub type R12 = SMatrix<f64, 12, 12>;

pub fn realify_drift(a: &CMatrix6) -> R12 {
    R12::from_fn(|r, c| {
        let z = a[(r % 6, c % 6)];
        match (r < 6, c < 6) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn realify_noise(b: &SMatrix<Complex64, 6, 4>) -> SMatrix<f64, 12, 4> {
    SMatrix::<f64, 12, 4>::from_fn(|r, c| {
        let z = b[(r % 6, c)];
        if r < 6 {
            z.re
        } else {
            z.im
        }
    })
}

/// Solves `a S + S a^T = q` through the Kronecker form.
pub fn lyapunov(a: &R12, q: &R12) -> R12 {
    let n = 12;
    let mut k = DMatrix::<f64>::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for m in 0..n {
                k[(row, m + n * j)] += a[(i, m)];
                k[(row, i + n * m)] += a[(j, m)];
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, q.iter().copied());
    let x = k.lu().solve(&rhs).expect("stable drift gives a unique stationary covariance");
    let s = R12::from_iterator(x.iter().copied());
    (s + s.transpose()) * 0.5
}

/// Symmetric square root of a positive semidefinite matrix (negative rounding clamped).
pub fn psd_sqrt(m: &R12) -> R12 {
    let eig = nalgebra::SymmetricEigen::new((m + m.transpose()) * 0.5);
    let d = R12::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub struct OuProcess {
    pub dt: f64,
    /// Stationary covariance of the real coordinates.
    pub stationary: R12,
    phi: R12,
    step_noise: R12,
    start: R12,
}

impl OuProcess {
    pub fn new(a: &CMatrix6, b: &SMatrix<Complex64, 6, 4>, dt: f64) -> Self {
        let ar = realify_drift(a);
        let br = realify_noise(b);
        let stationary = lyapunov(&ar, &(br * br.transpose()));
        let phi = (-ar * dt).exp();
        let q = stationary - phi * stationary * phi.transpose();
        Self {
            dt,
            stationary,
            phi,
            step_noise: psd_sqrt(&q),
            start: psd_sqrt(&stationary),
        }
    }

    /// Equal-time complex covariance `E[dX dX^T]`.
    pub fn complex_covariance(&self) -> CMatrix6 {
        let s = &self.stationary;
        CMatrix6::from_fn(|r, c| {
            let (rr, ii, ri, ir) = (s[(r, c)], s[(r + 6, c + 6)], s[(r, c + 6)], s[(r + 6, c)]);
            Complex64::new(rr - ii, ri + ir)
        })
    }

    fn normals(noise: &mut NoiseStream) -> SVector<f64, 12> {
        let mut z = SVector::<f64, 12>::zeros();
        for k in 0..3 {
            let n = noise.next_step();
            for (i, v) in n.into_iter().enumerate() {
                z[4 * k + i] = v;
            }
        }
        z
    }

    /// Stationary samples of the complex fluctuation vector at `n` consecutive steps.
    pub fn path(&self, n: usize, seed: u64, index: u64, mut visit: impl FnMut(usize, [Complex64; 6])) {
        let mut noise = NoiseStream::new(seed, index);
        let mut y = self.start * Self::normals(&mut noise);
        for step in 0..n {
            let x = std::array::from_fn(|i| Complex64::new(y[i], y[i + 6]));
            visit(step, x);
            y = self.phi * y + self.step_noise * Self::normals(&mut noise);
        }
    }

    /// Periodogram `X(w) X(-w)^T / T` of one trajectory of `n` samples at each frequency.
    pub fn periodograms(&self, omegas: &[f64], phasors: &[Vec<Complex64>], n: usize, seed: u64, index: u64) -> Vec<CMatrix6> {
        let mut plus = vec![[Complex64::default(); 6]; omegas.len()];
        let mut minus = vec![[Complex64::default(); 6]; omegas.len()];
        self.path(n, seed, index, |step, x| {
            for w in 0..omegas.len() {
                let e = phasors[w][step];
                let ec = e.conj();
                for i in 0..6 {
                    plus[w][i] += x[i] * e;
                    minus[w][i] += x[i] * ec;
                }
            }
        });
        let scale = self.dt / n as f64;
        (0..omegas.len())
            .map(|w| CMatrix6::from_fn(|r, c| plus[w][r] * minus[w][c] * scale))
            .collect()
    }
}

/// `e^{-i w t_n}` for each frequency and step.
pub fn phasor_table(omegas: &[f64], dt: f64, n: usize) -> Vec<Vec<Complex64>> {
    omegas
        .iter()
        .map(|&w| (0..n).map(|k| Complex64::from_polar(1.0, -w * dt * k as f64)).collect())
        .collect()
}

/// Mean and standard error of each output-spectrum entry.
#[derive(Debug, Clone)]
pub struct OutputEstimate {
    pub mean: Matrix6<f64>,
    pub se: Matrix6<f64>,
}

/// Ensemble-averaged output spectra from `n_traj` simulated records of `n` steps.
pub fn estimate_output(
    params: &SystemParams,
    process: &OuProcess,
    omegas: &[f64],
    n: usize,
    n_traj: usize,
    seed: u64,
) -> Vec<OutputEstimate> {
    let phasors = phasor_table(omegas, process.dt, n);
    let mut sum = vec![Matrix6::<f64>::zeros(); omegas.len()];
    let mut sum_sq = vec![Matrix6::<f64>::zeros(); omegas.len()];
    for t in 0..n_traj {
        for (w, p) in process.periodograms(omegas, &phasors, n, seed, t as u64).iter().enumerate() {
            let o = output_spectra(params, p).s_out;
            sum[w] += o;
            sum_sq[w] += o.component_mul(&o);
        }
    }
    let nt = n_traj as f64;
    sum.iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            let mean = s / nt;
            let var = (q / nt - mean.component_mul(&mean)) * (nt / (nt - 1.0));
            OutputEstimate {
                mean,
                se: var.map(|v| (v.max(0.0) / nt).sqrt()),
            }
        })
        .collect()
}
