//! Seeded random numbers.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), whose output stream
//! for a given seed is fixed by the algorithm and independent of platform.
//! Uniforms take the top 53 bits of each 64-bit word. Normals come from the
//! Box–Muller transform; each pair of uniforms yields two normals, and the
//! second is cached for the next call.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Smallest standard deviation [`gaussian_matrix`] will use.
pub const MIN_STDDEV: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        // Lemire's nearly-divisionless rejection
        let n = n as u64;
        loop {
            let x = self.inner.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low >= n || low >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, mean: f64, stddev: f64) -> f64 {
        mean + stddev * self.standard_normal()
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Matrix of i.i.d. normal entries, filled row-major.
pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, mean: f64, stddev: f64) -> Matrix {
    let stddev = if stddev.is_nan() {
        MIN_STDDEV
    } else {
        stddev.max(MIN_STDDEV)
    };
    let data = (0..rows * cols).map(|_| rng.normal(mean, stddev)).collect();
    Matrix::new(rows, cols, data).expect("length matches by construction")
}

/// Draws a 0/1 matrix with `P(entry = 1) = probs[entry]`, one uniform per
/// entry in row-major order.
pub fn bernoulli_sample(rng: &mut Rng, probs: &Matrix) -> Result<Matrix> {
    if let Some(p) = probs.data().iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!(
            "bernoulli probability {p} outside [0, 1]"
        )));
    }
    let mut out = probs.clone();
    for v in out.data_mut() {
        *v = if rng.uniform() < *v { 1.0 } else { 0.0 };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        let ga = gaussian_matrix(&mut a, 4, 5, 0.0, 0.01);
        let gb = gaussian_matrix(&mut b, 4, 5, 0.0, 0.01);
        assert_eq!(ga, gb);
        assert_ne!(Rng::new(1).next_u64(), Rng::new(2).next_u64());
    }

    #[test]
    fn degenerate_width_collapses_to_mean() {
        let mut rng = Rng::new(3);
        let g = gaussian_matrix(&mut rng, 10, 10, 0.25, 0.0);
        assert!(g.data().iter().all(|v| (v - 0.25).abs() < 1e-10));
    }

    #[test]
    fn gaussian_sample_statistics() {
        let mut rng = Rng::new(7);
        let n = 100_000;
        let g = gaussian_matrix(&mut rng, n, 1, 0.0, 0.01);
        let mean = g.data().iter().sum::<f64>() / n as f64;
        let var = g.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 * 0.01 / (n as f64).sqrt(), "mean {mean}");
        assert!((var.sqrt() - 0.01).abs() < 0.02 * 0.01, "std {}", var.sqrt());
    }

    #[test]
    fn bernoulli_endpoints_and_mean() {
        let mut rng = Rng::new(9);
        let zeros = bernoulli_sample(&mut rng, &Matrix::zeros(3, 4)).unwrap();
        assert!(zeros.data().iter().all(|&v| v == 0.0));
        let ones = bernoulli_sample(&mut rng, &Matrix::filled(3, 4, 1.0)).unwrap();
        assert!(ones.data().iter().all(|&v| v == 1.0));

        let half = bernoulli_sample(&mut rng, &Matrix::filled(1000, 100, 0.5)).unwrap();
        let mean = half.data().iter().sum::<f64>() / 1e5;
        assert!((0.49..=0.51).contains(&mean), "{mean}");
    }

    #[test]
    fn bernoulli_is_deterministic_and_guarded() {
        let p = Matrix::filled(5, 5, 0.3);
        let a = bernoulli_sample(&mut Rng::new(1), &p).unwrap();
        let b = bernoulli_sample(&mut Rng::new(1), &p).unwrap();
        assert_eq!(a, b);
        assert!(bernoulli_sample(&mut Rng::new(1), &Matrix::filled(1, 1, 1.5)).is_err());
        assert!(bernoulli_sample(&mut Rng::new(1), &Matrix::filled(1, 1, -0.1)).is_err());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<usize> = (0..50).collect();
        Rng::new(4).shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = Rng::new(12);
        for n in 1..40 {
            for _ in 0..50 {
                assert!(rng.below(n) < n);
            }
        }
    }
}
