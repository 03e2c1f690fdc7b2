#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;

use crate::constants::MixingConstants;
use crate::error::{Error, Result};
use crate::{EIGHT_PI_SQ, FOUR_PI_SQ};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundVariant {
    /// `E‖u‖²_{H^{-β}}` for `0 < β ≤ d/4`; `epsilon` defaults to the midpoint
    /// of its admissible interval.
    AveragedMixing { beta: f64, epsilon: Option<f64> },
    /// `E‖u‖²_{H^{-β}}` for `β > d/4`.
    AveragedMixingHigh { beta: f64 },
    /// `‖Y‖_{ℓ^p}` for `p > 1`.
    LpDecay { p: f64 },
    /// `E‖u‖²_{L²}` for the heat equation with growth `λ ≥ 0` and viscosity `ν > 0`.
    HeatDissipation { lambda: f64, nu: f64 },
    /// `E‖u‖²_{H¹}`, an exact exponential growth.
    SobolevGrowth,
    /// `E sup_{[nt₀,(n+1)t₀]} ‖u‖²_{H^{-1}}`.
    IntervalMixing,
}

/// `t ↦ prefactor·e^{-rate·t}`. Growth is a negative rate. A missing
/// prefactor means only the rate is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurve {
    pub rate: f64,
    pub prefactor: Option<f64>,
}

impl BoundCurve {
    /// The curve normalized to `initial` at `t = 0` when no prefactor is known.
    pub fn eval(&self, t: f64, initial: f64) -> f64 {
        self.prefactor.unwrap_or(1.0) * initial * (-self.rate * t).exp()
    }
}

fn hypothesis(bound: &'static str, detail: alloc::string::String) -> Error {
    Error::Hypothesis { bound, detail }
}

/// Bound curve of the chosen variant.
pub fn theoretical_bounds(c: &MixingConstants, variant: BoundVariant) -> Result<BoundCurve> {
    let d = c.dim as f64;
    let k = c.kappa;
    match variant {
        BoundVariant::AveragedMixing { beta, epsilon } => {
            const NAME: &str = "averaged H^-β mixing, β ≤ d/4";
            if !(beta > 0.0 && beta <= d / 4.0) {
                return Err(hypothesis(NAME, format!("needs 0 < β ≤ d/4 = {}, got {beta}", d / 4.0)));
            }
            let top = beta * (d - 2.0 * beta) / (d * d);
            let eps = epsilon.unwrap_or(top / 2.0);
            if !(eps > 0.0 && eps < top) {
                return Err(hypothesis(NAME, format!("needs 0 < ε < {top}, got {eps}")));
            }
            Ok(BoundCurve { rate: 2.0 * k * c.c_theta * (top - eps), prefactor: None })
        }
        BoundVariant::AveragedMixingHigh { beta } => {
            if !(beta > d / 4.0) {
                return Err(hypothesis(
                    "averaged H^-β mixing, β > d/4",
                    format!("needs β > d/4 = {}, got {beta}", d / 4.0),
                ));
            }
            Ok(BoundCurve { rate: k * c.c_theta / 4.0, prefactor: None })
        }
        BoundVariant::LpDecay { p } => {
            if !(p > 1.0 && p.is_finite()) {
                return Err(hypothesis("ℓ^p decay", format!("needs p > 1, got {p}")));
            }
            Ok(BoundCurve { rate: k * c.c_theta * (1.0 / p) * (1.0 - 1.0 / p), prefactor: Some(1.0) })
        }
        BoundVariant::HeatDissipation { lambda, nu } => {
            if !(lambda >= 0.0 && nu > 0.0 && lambda.is_finite() && nu.is_finite()) {
                return Err(hypothesis(
                    "heat dissipation",
                    format!("needs λ ≥ 0 and ν > 0, got λ = {lambda}, ν = {nu}"),
                ));
            }
            let gap = EIGHT_PI_SQ * nu + c.d_theta * k;
            let c0 = 1.0 / FOUR_PI_SQ;
            Ok(BoundCurve { rate: gap - 2.0 * lambda, prefactor: Some(c0 * gap / (2.0 * nu)) })
        }
        BoundVariant::SobolevGrowth => Ok(BoundCurve { rate: -EIGHT_PI_SQ * k * c.h_plus1, prefactor: Some(1.0) }),
        BoundVariant::IntervalMixing => {
            let rate = if c.dim <= 3 { k * c.c_theta / 4.0 } else { 2.0 * k * (d - 3.0) / (d * d) * c.c_theta };
            Ok(BoundCurve { rate, prefactor: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PI;

    fn unit_shell() -> MixingConstants {
        MixingConstants::from_norms(2, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn l2_rate_for_unit_shell() {
        let b = theoretical_bounds(&unit_shell(), BoundVariant::LpDecay { p: 2.0 }).unwrap();
        assert!((b.rate - PI * PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn heat_rate_and_prefactor() {
        let b = theoretical_bounds(&unit_shell(), BoundVariant::HeatDissipation { lambda: 1.0, nu: 0.01 }).unwrap();
        assert!((b.rate - 1.2569694523594883).abs() < 1e-12);
        // (0.08π² + π²/4)/(0.02·4π²) = 0.33/0.08
        assert!((b.prefactor.unwrap() - 4.125).abs() < 1e-12);
    }

    #[test]
    fn growth_rate() {
        let b = theoretical_bounds(&unit_shell(), BoundVariant::SobolevGrowth).unwrap();
        assert!((b.rate + 8.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn averaged_mixing_hypotheses() {
        let c = unit_shell();
        let b = theoretical_bounds(&c, BoundVariant::AveragedMixing { beta: 0.5, epsilon: None }).unwrap();
        // β(d-2β)/d² = 1/4, ε = 1/8
        assert!((b.rate - PI * PI / 8.0).abs() < 1e-13);
        assert!(theoretical_bounds(&c, BoundVariant::AveragedMixing { beta: 0.6, epsilon: None }).is_err());
        assert!(theoretical_bounds(&c, BoundVariant::AveragedMixing { beta: 0.5, epsilon: Some(0.25) }).is_err());
        assert!(theoretical_bounds(&c, BoundVariant::AveragedMixingHigh { beta: 0.5 }).is_err());
        assert!(theoretical_bounds(&c, BoundVariant::LpDecay { p: 1.0 }).is_err());
        assert!(theoretical_bounds(&c, BoundVariant::HeatDissipation { lambda: 1.0, nu: 0.0 }).is_err());
    }

    #[test]
    fn interval_rates_by_dimension() {
        let c4 = MixingConstants::from_norms(4, 1.0, 1.0, 1.0).unwrap();
        let b = theoretical_bounds(&c4, BoundVariant::IntervalMixing).unwrap();
        assert!((b.rate - 2.0 / 16.0 * c4.c_theta).abs() < 1e-14);
        let b = theoretical_bounds(&unit_shell(), BoundVariant::IntervalMixing).unwrap();
        assert!((b.rate - PI * PI / 4.0).abs() < 1e-14);
    }
}
