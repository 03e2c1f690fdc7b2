//! The master equation
//!
//! `dY_k/dt = (2λ - 8π²(ν+κ)|k|²) Y_k + 8π² C_d κ Σ_l θ_l² |Π_l^⊥ k|² Y_{k-l}`
//!
//! assembled as a sparse operator on a [`LatticeBox`].

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::lattice::{perp_numerator, LatticeBox};
use crate::theta::ThetaCoefficients;
use crate::EIGHT_PI_SQ;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// Transfers are kept only when both endpoints lie in the box, and the
    /// loss of each mode is the sum of its kept transfers. Mass is conserved.
    Conservative,
    /// Full loss `8π²κ|k|²Y_k`; gains only from sources inside the box.
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    /// Width of the boundary band used for leakage accounting.
    pub boundary_margin: i64,
}

impl TruncationPolicy {
    pub fn conservative(boundary_margin: i64) -> Self {
        Self { mode: TruncationMode::Conservative, boundary_margin }
    }

    pub fn absorbing(boundary_margin: i64) -> Self {
        Self { mode: TruncationMode::Absorbing, boundary_margin }
    }
}

/// Sparse form of the master equation: a diagonal plus, for every mode, the
/// list of `(source id, rate)` gains.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterOperator {
    diag: Vec<f64>,
    offsets: Vec<usize>,
    sources: Vec<u32>,
    rates: Vec<f64>,
    max_rate: f64,
    policy: TruncationPolicy,
}

impl MasterOperator {
    /// Transport noise only.
    pub fn transport(
        lattice: &LatticeBox,
        theta: &ThetaCoefficients,
        kappa: f64,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(invalid(format!("κ must be positive, got {kappa}")));
        }
        Self::assemble(lattice, theta, kappa, 0.0, 0.0, policy)
    }

    /// Transport noise with linear growth `λ` and viscosity `ν > 0`.
    pub fn heat(
        lattice: &LatticeBox,
        theta: &ThetaCoefficients,
        kappa: f64,
        lambda: f64,
        nu: f64,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(invalid(format!("ν must be positive, got {nu}")));
        }
        Self::assemble(lattice, theta, kappa, lambda, nu, policy)
    }

    /// Same as [`MasterOperator::heat`] but accepts `ν = 0`, in which case
    /// `λ = 0` reproduces [`MasterOperator::transport`] exactly.
    pub fn assemble(
        lattice: &LatticeBox,
        theta: &ThetaCoefficients,
        kappa: f64,
        lambda: f64,
        nu: f64,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        for (name, v) in [("κ", kappa), ("λ", lambda), ("ν", nu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        if theta.dim() != lattice.dim() {
            return Err(invalid("θ and lattice dimensions differ"));
        }
        if theta.support_sup_norm() > lattice.radius() {
            return Err(Error::SupportExceedsLattice(format!(
                "θ reaches |l|_∞ = {} in a box of radius {}",
                theta.support_sup_norm(),
                lattice.radius()
            )));
        }
        let d = lattice.dim() as f64;
        let gain_scale = EIGHT_PI_SQ * d / (d - 1.0) * kappa;
        let steps: Vec<(&[i64], f64, f64)> = theta
            .entries()
            .iter()
            .map(|e| (e.k.as_slice(), gain_scale * e.value * e.value, e.norm_sq as f64))
            .collect();
        let n = lattice.len();
        let mut diag = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::new();
        let mut rates = Vec::new();
        offsets.push(0);
        for id in lattice.ids() {
            let k = lattice.point(id);
            let n2 = lattice.norm_sq(id) as f64;
            for &(l, scale, ll) in &steps {
                let num = perp_numerator(k, l);
                if num == 0 {
                    continue;
                }
                if let Some(src) = lattice.shift(id, l, -1) {
                    sources.push(src as u32);
                    rates.push(scale * (num as f64 / ll));
                }
            }
            offsets.push(sources.len());
            let reaction = 2.0 * lambda - EIGHT_PI_SQ * nu * n2;
            let loss = match policy.mode {
                TruncationMode::Absorbing => EIGHT_PI_SQ * kappa * n2,
                TruncationMode::Conservative => steps
                    .iter()
                    .filter(|(l, _, _)| lattice.shift(id, l, 1).is_some())
                    .map(|&(l, scale, ll)| scale * (perp_numerator(k, l) as f64 / ll))
                    .sum(),
            };
            diag.push(reaction - loss);
        }
        let max_rate = EIGHT_PI_SQ * (nu + kappa) * lattice.max_norm_sq() as f64 + 2.0 * lambda;
        Ok(Self { diag, offsets, sources, rates, max_rate, policy })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// `8π²(ν+κ)|k|²_max + 2λ`, the step-size reference rate.
    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `(source, rate)` gains into mode `id`.
    pub fn gains(&self, id: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[id]..self.offsets[id + 1];
        self.sources[r.clone()].iter().zip(&self.rates[r]).map(|(&s, &q)| (s as usize, q))
    }

    /// `out = A·y`.
    pub fn apply(&self, y: &[f64], out: &mut [f64]) {
        for (id, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[id] * y[id];
            let r = self.offsets[id]..self.offsets[id + 1];
            for (&s, &q) in self.sources[r.clone()].iter().zip(&self.rates[r]) {
                acc += q * y[s as usize];
            }
            *o = acc;
        }
    }
}

fn check_len(lattice: &LatticeBox, y: &[f64]) -> Result<()> {
    if y.len() != lattice.len() {
        return Err(invalid(format!("spectrum has {} entries, lattice has {}", y.len(), lattice.len())));
    }
    Ok(())
}

/// `dY/dt` for the transport equation.
pub fn transport_rhs(
    lattice: &LatticeBox,
    y: &[f64],
    theta: &ThetaCoefficients,
    kappa: f64,
    policy: TruncationPolicy,
) -> Result<Vec<f64>> {
    check_len(lattice, y)?;
    let op = MasterOperator::transport(lattice, theta, kappa, policy)?;
    let mut out = alloc::vec![0.0; y.len()];
    op.apply(y, &mut out);
    Ok(out)
}

/// `dY/dt` for the heat equation with transport noise.
pub fn heat_rhs(
    lattice: &LatticeBox,
    y: &[f64],
    theta: &ThetaCoefficients,
    kappa: f64,
    lambda: f64,
    nu: f64,
    policy: TruncationPolicy,
) -> Result<Vec<f64>> {
    check_len(lattice, y)?;
    let op = MasterOperator::heat(lattice, theta, kappa, lambda, nu, policy)?;
    let mut out = alloc::vec![0.0; y.len()];
    op.apply(y, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::basis_vectors;
    use crate::lattice::build_lattice;
    use crate::spectrum::SpectrumState;
    use crate::theta::{make_theta, ThetaFamily};
    use crate::PI;
    use alloc::vec;
    use proptest::prelude::*;

    const CONS: TruncationPolicy = TruncationPolicy { mode: TruncationMode::Conservative, boundary_margin: 1 };
    const ABS: TruncationPolicy = TruncationPolicy { mode: TruncationMode::Absorbing, boundary_margin: 1 };

    /// Double loop over `(k, l, i)` with explicit frames and the full loss
    /// `8π²κ|k|²`, restricted to in-box sources.
    fn brute_force_absorbing(lattice: &LatticeBox, theta: &ThetaCoefficients, kappa: f64, y: &[f64]) -> Vec<f64> {
        let d = lattice.dim() as f64;
        let c_d = d / (d - 1.0);
        lattice
            .ids()
            .map(|id| {
                let k = lattice.point(id);
                let mut acc = -8.0 * PI * PI * kappa * lattice.norm_sq(id) as f64 * y[id];
                for e in theta.entries() {
                    let src: Vec<i64> = k.iter().zip(&e.k).map(|(a, b)| a - b).collect();
                    let Some(s) = lattice.id_of(&src) else { continue };
                    for a in basis_vectors(&e.k).unwrap() {
                        let ak: f64 = a.iter().zip(k).map(|(x, &c)| x * c as f64).sum();
                        acc += 8.0 * PI * PI * c_d * kappa * e.value * e.value * ak * ak * y[s];
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn single_mode_transfers() {
        let b = build_lattice(2, 3).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let y = SpectrumState::delta(&b, &[1, 0], 1.0).unwrap();
        let r = transport_rhs(&b, &y.values, &t, 1.0, CONS).unwrap();
        let at = |k: &[i64]| r[b.id_of(k).unwrap()];
        let p2 = PI * PI;
        assert!((at(&[1, 0]) + 8.0 * p2).abs() < 1e-12);
        assert!((at(&[1, 1]) - 4.0 * p2).abs() < 1e-12);
        assert!((at(&[1, -1]) - 4.0 * p2).abs() < 1e-12);
        let others = b.ids().filter(|&id| ![[1, 0], [1, 1], [1, -1]].iter().any(|k| b.id_of(k) == Some(id)));
        for id in others {
            assert_eq!(r[id], 0.0);
        }
        let zero = transport_rhs(&b, &vec![0.0; b.len()], &t, 1.0, CONS).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn heat_rhs_diagonal_and_degeneration() {
        let b = build_lattice(2, 3).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let y = SpectrumState::delta(&b, &[1, 0], 1.0).unwrap();
        let nu = 1.0 / (8.0 * PI * PI);
        let r = heat_rhs(&b, &y.values, &t, 0.0, 1.0, nu, CONS).unwrap();
        assert!((r[b.id_of(&[1, 0]).unwrap()] - 1.0).abs() < 1e-14);
        assert!(heat_rhs(&b, &y.values, &t, 1.0, 0.0, 0.0, CONS).is_err());
        let ys: Vec<f64> = (0..b.len()).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
        for policy in [CONS, ABS] {
            let op = MasterOperator::assemble(&b, &t, 1.0, 0.0, 0.0, policy).unwrap();
            let mut out = vec![0.0; b.len()];
            op.apply(&ys, &mut out);
            let reference = transport_rhs(&b, &ys, &t, 1.0, policy).unwrap();
            assert!(out.iter().zip(&reference).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn conservative_rates_are_symmetric() {
        let b = build_lattice(2, 5).unwrap();
        let t = make_theta(&ThetaFamily::Shells { radius: 2.0 }, &b).unwrap();
        let op = MasterOperator::transport(&b, &t, 1.3, CONS).unwrap();
        for id in b.ids() {
            for (src, q) in op.gains(id) {
                let back = op.gains(src).find(|&(s, _)| s == id).map(|(_, q)| q);
                assert_eq!(back, Some(q));
            }
        }
    }

    #[test]
    fn support_outside_box_rejected() {
        let big = build_lattice(2, 3).unwrap();
        let t = make_theta(&ThetaFamily::Shells { radius: 3.0 }, &big).unwrap();
        let small = build_lattice(2, 2).unwrap();
        assert!(matches!(
            MasterOperator::transport(&small, &t, 1.0, CONS),
            Err(Error::SupportExceedsLattice(_))
        ));
    }

    #[test]
    fn matches_brute_force_oracle() {
        for (d, n, family) in [
            (2, 6, ThetaFamily::UnitShell),
            (2, 6, ThetaFamily::PowerLaw { alpha: 0.5, cutoff: 2.3 }),
            (3, 3, ThetaFamily::Shells { radius: 1.5 }),
        ] {
            let b = build_lattice(d, n).unwrap();
            let t = make_theta(&family, &b).unwrap();
            let y: Vec<f64> = (0..b.len()).map(|i| 1.0 + ((i * 31) % 17) as f64).collect();
            let fast = transport_rhs(&b, &y, &t, 0.7, ABS).unwrap();
            let slow = brute_force_absorbing(&b, &t, 0.7, &y);
            let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).abs() <= 1e-12 * scale, "{f} vs {s}");
            }
        }
    }

    #[test]
    fn loss_matches_total_transfer_rate() {
        // Away from the boundary the conservative loss equals 8π²κ|k|².
        let b = build_lattice(3, 4).unwrap();
        let t = make_theta(&ThetaFamily::Shells { radius: 2.0 }, &b).unwrap();
        let op = MasterOperator::transport(&b, &t, 1.0, CONS).unwrap();
        for id in b.ids().filter(|&id| !b.in_band(id, 2)) {
            let expected = 8.0 * PI * PI * b.norm_sq(id) as f64;
            assert!((op.diagonal()[id] + expected).abs() <= 1e-12 * expected);
        }
    }

    proptest! {
        #[test]
        fn conservative_rhs_sums_to_zero(seed in 0u64..1000) {
            let b = build_lattice(2, 4).unwrap();
            let t = make_theta(&ThetaFamily::Shells { radius: 1.5 }, &b).unwrap();
            let y: Vec<f64> = (0..b.len() as u64).map(|i| ((i * 2654435761 + seed * 97) % 1000) as f64 / 1000.0).collect();
            let r = transport_rhs(&b, &y, &t, 1.0, CONS).unwrap();
            let scale: f64 = r.iter().map(|v| v.abs()).sum();
            prop_assert!(r.iter().sum::<f64>().abs() <= 1e-13 * scale);
        }

        #[test]
        fn identity_c_d_sum_equals_norm(k in proptest::collection::vec(-9i64..=9, 2..=3)) {
            prop_assume!(k.iter().any(|&c| c != 0));
            let d = k.len();
            let b = build_lattice(d, 3).unwrap();
            let t = make_theta(&ThetaFamily::Shells { radius: 2.0 }, &b).unwrap();
            let c_d = d as f64 / (d as f64 - 1.0);
            let s: f64 = t.entries().iter()
                .map(|e| e.value * e.value * crate::lattice::perp_proj_sq(&k, &e.k).unwrap())
                .sum();
            let n2 = crate::lattice::norm_sq(&k) as f64;
            prop_assert!((c_d * s - n2).abs() <= 1e-12 * n2);
        }
    }
}
