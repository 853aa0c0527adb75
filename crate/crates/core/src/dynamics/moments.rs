use num_complex::Complex64;

use super::PhaseSpacePoint;

/// The six phase-space variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    A1 = 0,
    A1p = 1,
    A2 = 2,
    A2p = 3,
    A3 = 4,
    A3p = 5,
}

impl Var {
    pub const ALL: [Var; 6] = [Var::A1, Var::A1p, Var::A2, Var::A2p, Var::A3, Var::A3p];

    /// Annihilation-side variable of mode `j` (1-based).
    pub fn amp(j: usize) -> Var {
        Self::ALL[2 * (j - 1)]
    }

    /// Plus-variable of mode `j` (1-based).
    pub fn plus(j: usize) -> Var {
        Self::ALL[2 * (j - 1) + 1]
    }
}

const PAIRS: usize = 21;
const FIRST: usize = 0;
const SECOND: usize = 6;
const NN: usize = SECOND + PAIRS;
const SUM12_SQ: usize = NN + 6;

/// Per-sample raw stochastic moments: 6 first moments, 21 products of pairs,
/// 6 intensity products `n_j n_k` and `(n1 + n2)^2`.
pub const NUM_MOMENTS: usize = SUM12_SQ + 1;

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // Row-major upper triangle of a 6x6 matrix.
    i * 6 - i * (i + 1) / 2 + j
}

fn nn_index(j: usize, k: usize) -> usize {
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    j * 3 - j * (j + 1) / 2 + k
}

/// Products of one phase-space point that are averaged into the table.
#[inline]
fn accumulate(sums: &mut [Complex64; NUM_MOMENTS], x: &PhaseSpacePoint) {
    let v = x.to_array();
    for i in 0..6 {
        sums[FIRST + i] += v[i];
        for j in i..6 {
            sums[SECOND + pair_index(i, j)] += v[i] * v[j];
        }
    }
    let n = [v[1] * v[0], v[3] * v[2], v[5] * v[4]];
    for j in 0..3 {
        for k in j..3 {
            sums[NN + nn_index(j, k)] += n[j] * n[k];
        }
    }
    let s = n[0] + n[1];
    sums[SUM12_SQ] += s * s;
}

/// Ensemble means of the raw (normally ordered) stochastic moments at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments(pub [Complex64; NUM_MOMENTS]);

impl Moments {
    pub fn mean(&self, v: Var) -> Complex64 {
        self.0[FIRST + v as usize]
    }

    pub fn second(&self, a: Var, b: Var) -> Complex64 {
        self.0[SECOND + pair_index(a as usize, b as usize)]
    }

    /// `E[a_j+ a_j]`, the mean photon number of mode `j`.
    pub fn intensity(&self, j: usize) -> Complex64 {
        self.second(Var::plus(j), Var::amp(j))
    }

    /// `E[n_j n_k]` with `n_j = a_j+ a_j`.
    pub fn nn(&self, j: usize, k: usize) -> Complex64 {
        self.0[NN + nn_index(j - 1, k - 1)]
    }

    /// `E[(n_1 + n_2)^2]`.
    pub fn sum12_sq(&self) -> Complex64 {
        self.0[SUM12_SQ]
    }

    /// `self + h (other - self)`, used for directional derivatives.
    pub fn toward(&self, other: &Moments, h: f64) -> Moments {
        let mut out = *self;
        for (o, (a, b)) in out.0.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a + (b - a) * h;
        }
        out
    }
}

/// Moment sums of one trajectory batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// Trajectories that completed without diverging.
    pub count: usize,
    pub diverged: usize,
    pub sums: Vec<[Complex64; NUM_MOMENTS]>,
}

impl Batch {
    pub fn new(n_samples: usize) -> Self {
        Self {
            count: 0,
            diverged: 0,
            sums: vec![[Complex64::default(); NUM_MOMENTS]; n_samples],
        }
    }

    /// Adds one trajectory recorded on the sample grid.
    pub fn push(&mut self, samples: &[PhaseSpacePoint]) {
        assert_eq!(samples.len(), self.sums.len(), "trajectory length differs from the sample grid");
        for (sums, x) in self.sums.iter_mut().zip(samples) {
            accumulate(sums, x);
        }
        self.count += 1;
    }

    pub fn means(&self, sample: usize) -> Option<Moments> {
        (self.count > 0).then(|| {
            let n = self.count as f64;
            Moments(self.sums[sample].map(|s| s / n))
        })
    }
}

/// Ensemble-averaged moments on a common sample grid, kept per batch for error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub n_diverged: usize,
    pub batches: Vec<Batch>,
}

impl MomentTable {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Trajectories contributing to the averages.
    pub fn included(&self) -> usize {
        self.batches.iter().map(|b| b.count).sum()
    }

    /// Grand means over all included trajectories.
    pub fn means(&self, sample: usize) -> Moments {
        let mut total = [Complex64::default(); NUM_MOMENTS];
        for b in &self.batches {
            for (t, s) in total.iter_mut().zip(b.sums[sample].iter()) {
                *t += s;
            }
        }
        let n = self.included().max(1) as f64;
        Moments(total.map(|s| s / n))
    }

    /// Table restricted to the samples in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> MomentTable {
        MomentTable {
            times: self.times[range.clone()].to_vec(),
            n_traj: self.n_traj,
            n_diverged: self.n_diverged,
            batches: self
                .batches
                .iter()
                .map(|b| Batch {
                    count: b.count,
                    diverged: b.diverged,
                    sums: b.sums[range.clone()].to_vec(),
                })
                .collect(),
        }
    }

    /// Means of each non-empty batch.
    pub fn batch_means(&self, sample: usize) -> Vec<Moments> {
        self.batches.iter().filter_map(|b| b.means(sample)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_are_a_bijection() {
        let mut seen = [false; PAIRS];
        for i in 0..6 {
            for j in i..6 {
                let k = pair_index(i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(pair_index(j, i), k);
            }
        }
        assert!(seen.iter().all(|s| *s));
        let mut seen = [false; 6];
        for j in 0..3 {
            for k in j..3 {
                seen[nn_index(j, k)] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn accumulate_single_point() {
        let x = PhaseSpacePoint::coherent(
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(0.0, 3.0),
        );
        let mut sums = [Complex64::default(); NUM_MOMENTS];
        accumulate(&mut sums, &x);
        let m = Moments(sums);
        assert_eq!(m.mean(Var::A2p), x.a2p);
        assert_eq!(m.second(Var::A3, Var::A1p), x.a1p * x.a3);
        assert_eq!(m.intensity(1), Complex64::new(5.0, 0.0));
        assert_eq!(m.nn(1, 3), Complex64::new(45.0, 0.0));
        assert_eq!(m.sum12_sq(), Complex64::new(6.25 * 6.25, 0.0));
    }
}
