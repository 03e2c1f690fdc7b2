#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Samples required by [`fit_decay_rate`].
pub const MIN_DECAY_SAMPLES: usize = 8;

/// Least-squares fit of `log y = intercept - rate·t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub window: (f64, f64),
    /// Decay rate; negative for growth.
    pub rate: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub samples: usize,
    /// Largest boundary-band mass fraction inside the window, when supplied.
    pub leakage_max: Option<f64>,
}

impl RateFit {
    /// Records the largest leakage value over the fit window.
    pub fn with_leakage(mut self, times: &[f64], leakage: &[f64]) -> Self {
        let (a, b) = self.window;
        self.leakage_max = times
            .iter()
            .zip(leakage)
            .filter(|(t, _)| **t >= a && **t <= b)
            .map(|(_, l)| *l)
            .reduce(f64::max);
        self
    }
}

/// Log-linear fit over the samples with `t` in `window` (all samples when
/// `None`), requiring at least `min_samples` points.
pub fn fit_log_linear(
    times: &[f64],
    values: &[f64],
    window: Option<(f64, f64)>,
    min_samples: usize,
) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(invalid("time and value series differ in length"));
    }
    let (a, b) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if !(a < b) {
        return Err(invalid(format!("empty fit window [{a}, {b}]")));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < min_samples.max(2) {
        return Err(Error::TooFewSamples { needed: min_samples.max(2), got: pts.len() });
    }
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositive { t, value: v });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (v.ln() - lm);
    }
    if sxx == 0.0 {
        return Err(invalid("fit window contains a single time"));
    }
    let slope = sxy / sxx;
    let intercept = lm - slope * tm;
    let ss: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - (intercept + slope * t);
            r * r
        })
        .sum();
    Ok(RateFit {
        window: (pts[0].0, pts[pts.len() - 1].0),
        rate: -slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
        samples: pts.len(),
        leakage_max: None,
    })
}

/// Decay-rate fit with at least [`MIN_DECAY_SAMPLES`] samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<RateFit> {
    fit_log_linear(times, values, window, MIN_DECAY_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(n: usize, t1: f64) -> Vec<f64> {
        (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_exponentials() {
        let t = grid(20, 2.0);
        let y: Vec<f64> = t.iter().map(|t| (-3.0 * t).exp()).collect();
        let f = fit_decay_rate(&t, &y, None).unwrap();
        assert!((f.rate - 3.0).abs() < 1e-9);
        let y: Vec<f64> = t.iter().map(|t| 5.0 * (-3.0 * t).exp()).collect();
        let f = fit_decay_rate(&t, &y, None).unwrap();
        assert!((f.rate - 3.0).abs() < 1e-9 && (f.intercept - 5f64.ln()).abs() < 1e-9);
        assert!(f.residual_rms < 1e-12);
    }

    #[test]
    fn late_window_isolates_slow_mode() {
        let t = grid(200, 6.0);
        let y: Vec<f64> = t.iter().map(|t| (-3.0 * t).exp() + (-10.0 * t).exp()).collect();
        let f = fit_decay_rate(&t, &y, Some((3.0, 6.0))).unwrap();
        // Two-exponential oracle: the fast term is below e^{-21} relative.
        assert!((f.rate - 3.0).abs() < 1e-8);
    }

    #[test]
    fn errors() {
        let t = grid(5, 1.0);
        let y = vec![1.0; 5];
        assert!(matches!(fit_decay_rate(&t, &y, None), Err(Error::TooFewSamples { .. })));
        let t = grid(10, 1.0);
        let mut y = vec![1.0; 10];
        y[4] = 0.0;
        assert!(matches!(fit_decay_rate(&t, &y, None), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn leakage_maximum_in_window() {
        let t = grid(10, 9.0);
        let y: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let leak: Vec<f64> = t.iter().map(|t| t * 1e-4).collect();
        let f = fit_decay_rate(&t, &y, Some((0.0, 8.0))).unwrap().with_leakage(&t, &leak);
        assert_eq!(f.leakage_max, Some(8e-4));
    }
}
