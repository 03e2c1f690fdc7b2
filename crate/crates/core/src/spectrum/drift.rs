use crate::error::{invalid, Result};
use crate::lattice::{norm_sq, perp_numerator, LatticeBox};
use crate::theta::ThetaCoefficients;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// `d/dt Σ_k Y_k/|2πk|²` on the full lattice.
    pub drift: f64,
    /// Set when `Y` has mass within one noise step of the box boundary.
    pub boundary_warning: bool,
}

/// Instantaneous drift of `E‖u‖²_{H^{-1}}` under transport noise.
///
/// Each source mode `j` contributes
/// `Y_j·(-2κ + 2C_dκ Σ_l θ_l² |Π_l^⊥ j|²/|j+l|²)`, which sums the master
/// equation against `1/|2πk|²` on the infinite lattice. Targets outside the
/// box are therefore included.
pub fn h_minus1_drift(
    lattice: &LatticeBox,
    y: &[f64],
    theta: &ThetaCoefficients,
    kappa: f64,
) -> Result<DriftReport> {
    if y.len() != lattice.len() {
        return Err(invalid("spectrum and lattice sizes differ"));
    }
    if theta.dim() != lattice.dim() {
        return Err(invalid("θ and lattice dimensions differ"));
    }
    let d = lattice.dim() as f64;
    let c_d = d / (d - 1.0);
    let margin = theta.support_sup_norm();
    let mut drift = 0.0;
    let mut boundary_warning = false;
    let mut target = alloc::vec![0i64; lattice.dim()];
    for id in lattice.ids() {
        let yj = y[id];
        if yj == 0.0 {
            continue;
        }
        boundary_warning |= lattice.in_band(id, margin);
        let j = lattice.point(id);
        let mut gain = 0.0;
        for e in theta.entries() {
            let num = perp_numerator(j, &e.k);
            if num == 0 {
                continue;
            }
            for (t, (a, b)) in target.iter_mut().zip(j.iter().zip(&e.k)) {
                *t = a + b;
            }
            gain += e.value * e.value * (num as f64 / e.norm_sq as f64) / norm_sq(&target) as f64;
        }
        drift += yj * kappa * (2.0 * c_d * gain - 2.0);
    }
    Ok(DriftReport { drift, boundary_warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::theta::{make_theta, ThetaFamily};

    #[test]
    fn zero_spectrum_has_zero_drift() {
        let b = build_lattice(2, 3).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let r = h_minus1_drift(&b, &alloc::vec![0.0; b.len()], &t, 1.0).unwrap();
        assert_eq!(r.drift, 0.0);
        assert!(!r.boundary_warning);
    }

    #[test]
    fn diagonal_and_axis_deltas() {
        let b = build_lattice(2, 4).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let mut y = alloc::vec![0.0; b.len()];
        y[b.id_of(&[1, 1]).unwrap()] = 1.0;
        let r = h_minus1_drift(&b, &y, &t, 1.5).unwrap();
        assert!((r.drift - 0.4 * 1.5).abs() < 1e-14);
        let mut y = alloc::vec![0.0; b.len()];
        y[b.id_of(&[1, 0]).unwrap()] = 2.0;
        let r = h_minus1_drift(&b, &y, &t, 1.0).unwrap();
        assert!((r.drift + 2.0).abs() < 1e-14);
        let mut y = alloc::vec![0.0; b.len()];
        y[b.id_of(&[4, 0]).unwrap()] = 1.0;
        assert!(h_minus1_drift(&b, &y, &t, 1.0).unwrap().boundary_warning);
    }
}
