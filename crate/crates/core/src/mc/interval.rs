use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::ensemble::{EnsembleStats, Moments};
use crate::constants::MixingConstants;
use crate::error::{invalid, Error, Result};
use crate::spectrum::{fit_log_linear, RateFit};

/// Quantile levels reported for the envelope constants.
pub const ENVELOPE_QUANTILES: [f64; 4] = [0.5, 0.9, 0.99, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub tau: f64,
    /// Ensemble moments of the per-interval sup of `‖u‖²_{H^{-1}}`.
    pub means: Vec<Moments>,
    /// Log-linear fit of the means against the interval midpoints.
    pub fit: RateFit,
    pub lambda_target: f64,
    /// Per path, the smallest `Ĉ` with `sup_n ≤ Ĉ ‖u_0‖² e^{-λ(n+1)τ}` on every interval.
    pub envelope: Vec<f64>,
    /// `(level, value)` nearest-rank quantiles of `envelope`.
    pub quantiles: Vec<(f64, f64)>,
    pub warning: Option<String>,
}

/// Decay statistics of the interval sups recorded in `stats`.
pub fn interval_sup_stats(
    stats: &EnsembleStats,
    lambda_target: f64,
    constants: &MixingConstants,
) -> Result<IntervalReport> {
    let tau = stats.tau.ok_or_else(|| invalid("the ensemble recorded no intervals"))?;
    let n = stats.interval_sup.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if !(lambda_target.is_finite() && lambda_target >= 0.0) {
        return Err(invalid(format!("target rate must be nonnegative, got {lambda_target}")));
    }
    let h0 = stats.h_minus1.first().map(|m| m.mean).unwrap_or(f64::NAN);
    if !(h0 > 0.0) {
        return Err(Error::NonPositive { t: 0.0, value: h0 });
    }
    let mids: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * tau).collect();
    let means: Vec<f64> = stats.interval_sup.iter().map(|m| m.mean).collect();
    let fit = fit_log_linear(&mids, &means, None, 3)?;
    let mut envelope: Vec<f64> = stats
        .path_interval_sups
        .iter()
        .map(|sups| {
            sups.iter()
                .enumerate()
                .map(|(i, s)| s * (lambda_target * (i as f64 + 1.0) * tau).exp() / h0)
                .fold(0.0, f64::max)
        })
        .collect();
    let mut sorted = envelope.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = ENVELOPE_QUANTILES
        .iter()
        .map(|&q| {
            let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            (q, sorted[rank - 1])
        })
        .collect();
    let limit = constants.d_theta * constants.kappa;
    let warning = (lambda_target >= limit)
        .then(|| format!("target rate {lambda_target} is not below the almost-sure rate {limit}"));
    envelope.shrink_to_fit();
    Ok(IntervalReport {
        tau,
        means: stats.interval_sup.clone(),
        fit,
        lambda_target,
        envelope,
        quantiles,
        warning,
    })
}
