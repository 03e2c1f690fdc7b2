use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Complex increments `ΔW^{l,i}` for the representative support vectors.
/// The increment of `-l` is the conjugate and is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub dt: f64,
    /// `d - 1` increments per representative, representative-major.
    pub increments: Vec<Complex64>,
    per_rep: usize,
}

impl NoiseDraw {
    /// A draw with every increment zero, which switches the noise off.
    pub fn zeros(representatives: usize, per_rep: usize, dt: f64) -> Self {
        Self { dt, increments: vec![Complex64::new(0.0, 0.0); representatives * per_rep], per_rep }
    }

    /// `ΔW^{l,i}`, conjugated when `l` is the negative of representative `r`.
    pub fn get(&self, r: usize, i: usize, negated: bool) -> Complex64 {
        let w = self.increments[r * self.per_rep + i];
        if negated {
            w.conj()
        } else {
            w
        }
    }

    /// Overwrites the increments with fresh draws from `rng`.
    pub fn refill<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let s = self.dt.sqrt();
        for w in self.increments.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *w = Complex64::new(re * s, im * s);
        }
    }
}

/// `ΔW = ΔB¹ + iΔB²` with independent `ΔB¹, ΔB² ~ N(0, dt)`, giving
/// `E[ΔW·conj ΔW] = 2dt` and `E[ΔW²] = 0`.
pub fn noise_increments<R: Rng + ?Sized>(
    representatives: usize,
    per_rep: usize,
    dt: f64,
    rng: &mut R,
) -> Result<NoiseDraw> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let mut d = NoiseDraw::zeros(representatives, per_rep, dt);
    d.refill(rng);
    Ok(d)
}

/// Sample moments of a batch of increments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementMoments {
    pub samples: usize,
    /// Mean of `ΔW·conj ΔW`.
    pub covariation: f64,
    pub covariation_se: f64,
    /// Mean of `ΔW²`.
    pub square: Complex64,
    /// Standard errors of the real and imaginary parts of the mean of `ΔW²`.
    pub square_se: (f64, f64),
}

pub fn increment_moments(samples: &[Complex64]) -> Result<IncrementMoments> {
    let n = samples.len();
    if n < 2 {
        return Err(crate::Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean_se = |f: &dyn Fn(&Complex64) -> f64| {
        let m = samples.iter().map(f).sum::<f64>() / nf;
        let v = samples.iter().map(|w| (f(w) - m).powi(2)).sum::<f64>() / (nf - 1.0);
        (m, (v / nf).sqrt())
    };
    let (covariation, covariation_se) = mean_se(&|w| w.norm_sqr());
    let (sr, sr_se) = mean_se(&|w| (w * w).re);
    let (si, si_se) = mean_se(&|w| (w * w).im);
    Ok(IncrementMoments {
        samples: n,
        covariation,
        covariation_se,
        square: Complex64::new(sr, si),
        square_se: (sr_se, si_se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn covariance_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dt = 1e-3;
        let d = noise_increments(20_000, 1, dt, &mut rng).unwrap();
        let m = increment_moments(&d.increments).unwrap();
        assert!((m.covariation - 2.0 * dt).abs() < 4.0 * m.covariation_se);
        assert!(m.square.re.abs() < 4.0 * m.square_se.0);
        assert!(m.square.im.abs() < 4.0 * m.square_se.1);
        assert_eq!(d.get(3, 0, true), d.get(3, 0, false).conj());
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(noise_increments(1, 1, 0.0, &mut rng).is_err());
    }
}
