//! Explicit mixing constants derived from `θ`, `d` and `κ`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;

use crate::error::{invalid, Result};
use crate::theta::ThetaCoefficients;
use crate::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingConstants {
    pub dim: usize,
    pub kappa: f64,
    /// `C_d = d/(d-1)`.
    pub c_d: f64,
    /// `C(θ,d)`, the averaged mixing constant.
    pub c_theta: f64,
    /// `D(θ,d)`, the almost-sure mixing constant.
    pub d_theta: f64,
    pub h_minus1: f64,
    pub h_plus1: f64,
    /// Interval length over which the sup of the `H^{-1}` norm at most doubles.
    pub t0: f64,
}

impl MixingConstants {
    pub fn from_norms(dim: usize, h_minus1: f64, h_plus1: f64, kappa: f64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dim}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(invalid(format!("κ must be positive, got {kappa}")));
        }
        let d = dim as f64;
        let c_d = d / (d - 1.0);
        let pi2h = PI * PI * h_minus1;
        let c_theta = if dim == 2 { pi2h } else { 2.0 * PI * PI / 5.0 * c_d * h_minus1 };
        let d_theta = pi2h
            * match dim {
                2 => 0.25,
                3 => 0.15,
                _ => 0.8 * (d - 3.0) / (d * (d - 1.0)),
            };
        let r = (11f64.sqrt() - 3.0) / 16.0;
        let t0 = r * r / (PI * PI * d * kappa * h_plus1);
        Ok(Self { dim, kappa, c_d, c_theta, d_theta, h_minus1, h_plus1, t0 })
    }
}

/// Constants for `θ` in dimension `d` with noise intensity `κ`.
pub fn mixing_constants(theta: &ThetaCoefficients, d: usize, kappa: f64) -> Result<MixingConstants> {
    if d != theta.dim() {
        return Err(invalid(format!("θ is {}-dimensional, constants requested for d = {d}", theta.dim())));
    }
    MixingConstants::from_norms(d, theta.h_minus1(), theta.h_plus1(), kappa)
}
