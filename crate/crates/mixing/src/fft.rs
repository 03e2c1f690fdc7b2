//! `rustfft` backend for the Euler solver's transform.

use std::sync::Arc;

use mixing_core::euler::Fft2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Row-column 2D transform on an `n × n` row-major grid, unnormalized.
pub struct RustFft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    column: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl RustFft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            column: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn run(&mut self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "grid buffer has the wrong size");
        let plan = if forward { &self.forward } else { &self.inverse };
        plan.process_with_scratch(data, &mut self.scratch);
        for c in 0..n {
            for r in 0..n {
                self.column[r] = data[r * n + c];
            }
            plan.process_with_scratch(&mut self.column, &mut self.scratch);
            for r in 0..n {
                data[r * n + c] = self.column[r];
            }
        }
    }
}

impl Fft2 for RustFft2 {
    fn size(&self) -> usize {
        self.n
    }

    fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixing_core::euler::NaiveDft;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_the_naive_transform() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let (mut a, mut b) = (data.clone(), data.clone());
        RustFft2::new(n).forward(&mut a);
        NaiveDft::new(n).forward(&mut b);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        let mut f = RustFft2::new(n);
        f.inverse(&mut a);
        let back = a.iter().zip(&data).map(|(x, y)| (x / (n * n) as f64 - y).norm()).fold(0.0, f64::max);
        assert!(back < 1e-14, "{back}");
    }
}
