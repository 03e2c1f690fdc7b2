use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lattice::{dot, perp_numerator, LatticeBox};
use crate::theta::ThetaCoefficients;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletReport {
    /// `Σ_l Σ_k θ_l²|Π_l^⊥k|²(Y_{k+l}^{p-1} - Y_k^{p-1})(Y_{k+l} - Y_k)`.
    pub dirichlet: f64,
    pub sum_yp: f64,
    /// `Σ Y^p / D(Y)`; NaN when both vanish.
    pub ratio: f64,
    /// Largest ratio allowed by the orbit argument.
    pub bound: f64,
}

impl DirichletReport {
    pub fn holds(&self) -> bool {
        self.ratio.is_nan() || self.ratio <= self.bound
    }
}

/// `8p²/((p-1)‖θ‖²_{h^{-1}})` in `d = 2`, `10p²/((p-1)‖θ‖²_{h^{-1}})` above.
pub fn dirichlet_ratio_bound(theta: &ThetaCoefficients, p: f64) -> f64 {
    let c = if theta.dim() == 2 { 8.0 } else { 10.0 };
    c * p * p / ((p - 1.0) * theta.h_minus1())
}

/// Evaluates the Dirichlet form of `Y` against `Σ Y^p`.
///
/// `Y` must vanish within `|l|_∞` of the boundary for every `l` in the
/// support of `θ`, so that pairs leaving the box contribute nothing.
pub fn dirichlet_ratio(
    lattice: &LatticeBox,
    y: &[f64],
    theta: &ThetaCoefficients,
    p: f64,
) -> Result<DirichletReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must exceed 1, got {p}")));
    }
    if y.len() != lattice.len() || theta.dim() != lattice.dim() {
        return Err(invalid("spectrum, θ and lattice do not match"));
    }
    let margin = theta.support_sup_norm();
    for id in lattice.ids() {
        let v = y[id];
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(format!("Y at {:?} is {v}", lattice.point(id))));
        }
        if v > 0.0 && lattice.in_band(id, margin) {
            return Err(Error::SupportMargin(format!(
                "Y is nonzero at {:?}, within {margin} of the boundary",
                lattice.point(id)
            )));
        }
    }
    let pw = |v: f64| if p == 2.0 { v } else { v.powf(p - 1.0) };
    let mut dirichlet = 0.0;
    for e in theta.entries() {
        let w = e.value * e.value / e.norm_sq as f64;
        for id in lattice.ids() {
            let Some(next) = lattice.shift(id, &e.k, 1) else { continue };
            let (a, b) = (y[id], y[next]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let num = perp_numerator(lattice.point(id), &e.k);
            dirichlet += w * num as f64 * (pw(b) - pw(a)) * (b - a);
        }
    }
    let sum_yp: f64 = y.iter().map(|&v| if p == 2.0 { v * v } else { v.powf(p) }).sum();
    let ratio = if sum_yp == 0.0 && dirichlet == 0.0 { f64::NAN } else { sum_yp / dirichlet };
    Ok(DirichletReport { dirichlet, sum_yp, ratio, bound: dirichlet_ratio_bound(theta, p) })
}

/// `(N, #pairs)` for the shell `|l|² = s` in `Z^d`: the number of lattice
/// points on it and the number of ordered linearly independent pairs, found
/// by enumeration.
pub fn shell_pair_count(d: usize, s: i64) -> Result<(usize, usize)> {
    if s < 1 {
        return Err(invalid(format!("shell |l|² = {s} is empty")));
    }
    let mut r = 1;
    while (r + 1) * (r + 1) <= s {
        r += 1;
    }
    let b = LatticeBox::new(d, r)?;
    let shell: Vec<&[i64]> = b.ids().map(|id| b.point(id)).filter(|k| dot(k, k) == s).collect();
    let mut pairs = 0;
    for a in &shell {
        for c in &shell {
            if perp_numerator(a, c) != 0 {
                pairs += 1;
            }
        }
    }
    Ok((shell.len(), pairs))
}
