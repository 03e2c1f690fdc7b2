//! Second-moment spectrum `Y_k = E|û_k|²` and its closed linear evolution.

mod bounds;
mod drift;
mod fit;
mod integrate;
mod norms;
mod operator;

pub use bounds::{theoretical_bounds, BoundCurve, BoundVariant};
pub use drift::{h_minus1_drift, DriftReport};
pub use fit::{fit_decay_rate, fit_log_linear, RateFit};
pub use integrate::{integrate, DtPolicy, Sample, Sampling, Trajectory};
pub use norms::{hbeta_sum, lp_norm, spectrum_norms, NormRecord};
pub use operator::{heat_rhs, transport_rhs, MasterOperator, TruncationMode, TruncationPolicy};

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::lattice::LatticeBox;

/// Dense spectrum indexed by lattice id.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumState {
    pub t: f64,
    pub values: Vec<f64>,
}

impl SpectrumState {
    /// Checks length, finiteness and nonnegativity.
    pub fn new(lattice: &LatticeBox, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(invalid(format!(
                "spectrum has {} entries, lattice has {} points",
                values.len(),
                lattice.len()
            )));
        }
        if let Some((id, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("Y at {:?} is {v}", lattice.point(id))));
        }
        Ok(Self { t: 0.0, values })
    }

    /// Mass `mass` spread uniformly over `{k : 0 < |k|² ≤ max_norm_sq}`.
    pub fn shell(lattice: &LatticeBox, max_norm_sq: i64, mass: f64) -> Result<Self> {
        let count = lattice.ids().filter(|&id| lattice.norm_sq(id) <= max_norm_sq).count();
        if count == 0 {
            return Err(invalid(format!("no lattice point with |k|² ≤ {max_norm_sq}")));
        }
        let v = mass / count as f64;
        let values = lattice
            .ids()
            .map(|id| if lattice.norm_sq(id) <= max_norm_sq { v } else { 0.0 })
            .collect();
        Self::new(lattice, values)
    }

    /// Unit mass at the single point `k`.
    pub fn delta(lattice: &LatticeBox, k: &[i64], mass: f64) -> Result<Self> {
        let id = lattice
            .id_of(k)
            .ok_or_else(|| invalid(format!("{k:?} is not a point of the box")))?;
        let mut values = alloc::vec![0.0; lattice.len()];
        values[id] = mass;
        Self::new(lattice, values)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Y_k = Y_{-k}` for every `k`.
    pub fn is_symmetric(&self, lattice: &LatticeBox) -> bool {
        lattice.ids().all(|id| self.values[id] == self.values[lattice.pair(id)])
    }

    /// Fraction of the mass with `|k|_∞ > N - margin`.
    pub fn band_fraction(&self, lattice: &LatticeBox, margin: i64) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let band: f64 = lattice
            .ids()
            .filter(|&id| lattice.in_band(id, margin))
            .map(|id| self.values[id])
            .sum();
        band / total
    }
}
