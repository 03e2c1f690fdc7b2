use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::flow::{velocity_from_vorticity, EulerGrid, VorticityState};
use crate::error::{invalid, Error, Result};
use crate::frame::basis_vectors;
use crate::lattice::{build_lattice, LatticeBox};
use crate::theta::{make_theta, ThetaCoefficients, ThetaFamily};
use crate::{FOUR_PI_SQ, PI};

/// `θ_k = |k|^{-(1+α)}/K_α` on `0 < |k| ≤ cutoff`, normalized on that set.
pub fn power_law_theta(lattice: &LatticeBox, alpha: f64, cutoff: f64) -> Result<ThetaCoefficients> {
    make_theta(&ThetaFamily::PowerLaw { alpha, cutoff }, lattice)
}

/// Quadratic variation of the change-of-measure martingale along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct GirsanovLedger {
    /// `K_α²` of the truncated family.
    pub k_alpha_sq: f64,
    pub kappa: f64,
    pub times: Vec<f64>,
    /// Trapezoidal `∫₀ᵗ ‖w‖²_{L²} ds`.
    pub integral: Vec<f64>,
    /// `[M,M]_t = K_α²/(4π²κ) ∫₀ᵗ ‖w‖² ds`.
    pub quadratic_variation: Vec<f64>,
    /// `K_α²/(4π²κ) ‖w_0‖² t`.
    pub ceiling: Vec<f64>,
}

impl GirsanovLedger {
    /// Largest `[M,M]_t - ceiling_t` relative to the final ceiling.
    pub fn ceiling_excess(&self) -> f64 {
        let top = self.ceiling.last().copied().unwrap_or(0.0);
        let worst = self
            .quadratic_variation
            .iter()
            .zip(&self.ceiling)
            .map(|(q, c)| q - c)
            .fold(f64::NEG_INFINITY, f64::max);
        if top > 0.0 {
            worst / top
        } else {
            worst
        }
    }
}

pub fn girsanov_diagnostics(times: &[f64], energy: &[f64], k_alpha_sq: f64, kappa: f64) -> Result<GirsanovLedger> {
    if times.len() != energy.len() {
        return Err(invalid("time and energy series differ in length"));
    }
    if times.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: times.len() });
    }
    if !(kappa.is_finite() && kappa > 0.0 && k_alpha_sq.is_finite() && k_alpha_sq > 0.0) {
        return Err(invalid(format!("κ and K_α² must be positive, got {kappa} and {k_alpha_sq}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("sample times must increase"));
    }
    let scale = k_alpha_sq / (FOUR_PI_SQ * kappa);
    let t0 = times[0];
    let mut acc = 0.0;
    let mut integral = Vec::with_capacity(times.len());
    integral.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (energy[i] + energy[i - 1]);
        integral.push(acc);
    }
    Ok(GirsanovLedger {
        k_alpha_sq,
        kappa,
        times: times.to_vec(),
        quadratic_variation: integral.iter().map(|v| scale * v).collect(),
        ceiling: times.iter().map(|t| scale * energy[0] * (t - t0)).collect(),
        integral,
    })
}

/// `|a_k·û_k| / (√(2κ) θ_k)` for each representative `k` of `supp θ` in the band.
pub fn drift_shift(
    grid: &EulerGrid,
    theta: &ThetaCoefficients,
    w: &VorticityState,
    kappa: f64,
) -> Result<Vec<(Vec<i64>, f64)>> {
    if !(kappa > 0.0) {
        return Err(invalid(format!("κ must be positive, got {kappa}")));
    }
    let u = velocity_from_vorticity(grid, w);
    let lat = grid.lattice();
    let mut out = Vec::new();
    for e in theta.representatives() {
        let Some(id) = lat.id_of(&e.k) else { continue };
        let a = &basis_vectors(&e.k)?[0];
        let proj = u[id][0] * a[0] + u[id][1] * a[1];
        out.push((e.k.clone(), proj.norm() / ((2.0 * kappa).sqrt() * e.value)));
    }
    Ok(out)
}

/// Output of [`kappa_for_target_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSizing {
    pub kappa: f64,
    pub h_minus1: f64,
    pub k_alpha_sq: f64,
    /// `decay_budget(κ) - λ`, zero up to rounding.
    pub slack: f64,
}

/// `π²κ‖θ‖²_{h^{-1}}/8 - K_α²R/(8π²κ)`.
pub fn decay_budget(kappa: f64, h_minus1: f64, k_alpha_sq: f64, r: f64) -> f64 {
    PI * PI * kappa * h_minus1 / 8.0 - k_alpha_sq * r / (8.0 * PI * PI * kappa)
}

/// Smallest `κ` with `decay_budget(κ) ≥ λ` for `θ^{(α)}` cut off at `|k| ≤ cutoff`,
/// the positive root of `(π²h/8)κ² - λκ - K_α²R/(8π²) = 0`.
pub fn kappa_for_target_rate(lambda: f64, r: f64, alpha: f64, cutoff: f64) -> Result<KappaSizing> {
    if !(lambda > 0.0 && r >= 0.0 && lambda.is_finite() && r.is_finite()) {
        return Err(invalid(format!("need λ > 0 and R ≥ 0, got {lambda} and {r}")));
    }
    if !(cutoff.is_finite() && cutoff >= 1.0) {
        return Err(invalid(format!("cutoff must be at least 1, got {cutoff}")));
    }
    let lattice = build_lattice(2, cutoff.floor() as i64)?;
    let theta = power_law_theta(&lattice, alpha, cutoff)?;
    let (h, k2) = (theta.h_minus1(), theta.raw_norm_sq());
    let a = PI * PI * h / 8.0;
    let b = k2 * r / (8.0 * PI * PI);
    let kappa = (lambda + (lambda * lambda + 4.0 * a * b).sqrt()) / (2.0 * a);
    Ok(KappaSizing { kappa, h_minus1: h, k_alpha_sq: k2, slack: decay_budget(kappa, h, k2, r) - lambda })
}
