use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::PI;

/// In-place 2D transform on an `n × n` row-major array.
///
/// `forward` computes `X_{ab} = Σ_{jk} x_{jk} e^{-2πi(aj+bk)/n}` and `inverse`
/// the same sum with `e^{+2πi…}`. Neither normalizes.
pub trait Fft2 {
    fn size(&self) -> usize;
    fn forward(&mut self, data: &mut [Complex64]);
    fn inverse(&mut self, data: &mut [Complex64]);
}

/// Row-column DFT with a twiddle table, `O(n³)` per transform.
#[derive(Debug, Clone)]
pub struct NaiveDft {
    n: usize,
    twiddles: Vec<Complex64>,
    line: Vec<Complex64>,
    out: Vec<Complex64>,
}

impl NaiveDft {
    pub fn new(n: usize) -> Self {
        let twiddles = (0..n.max(1))
            .map(|j| {
                let a = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        Self { n, twiddles, line: vec![Complex64::new(0.0, 0.0); n], out: vec![Complex64::new(0.0, 0.0); n] }
    }

    fn lines(&mut self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "array is not {n} × {n}");
        for axis in 0..2 {
            for r in 0..n {
                let at = |c: usize| if axis == 0 { r * n + c } else { c * n + r };
                for c in 0..n {
                    self.line[c] = data[at(c)];
                }
                for a in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, x) in self.line.iter().enumerate() {
                        let w = self.twiddles[(a * j) % n];
                        acc += x * if inverse { w.conj() } else { w };
                    }
                    self.out[a] = acc;
                }
                for c in 0..n {
                    data[at(c)] = self.out[c];
                }
            }
        }
    }
}

impl Fft2 for NaiveDft {
    fn size(&self) -> usize {
        self.n
    }

    fn forward(&mut self, data: &mut [Complex64]) {
        self.lines(data, false);
    }

    fn inverse(&mut self, data: &mut [Complex64]) {
        self.lines(data, true);
    }
}
