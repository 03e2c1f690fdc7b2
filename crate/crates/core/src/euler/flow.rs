use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::fft::Fft2;
use crate::error::{invalid, Result};
use crate::lattice::{build_lattice, LatticeBox};
use crate::mc::ModeState;
use crate::{FOUR_PI_SQ, PI};

/// Smallest supported grid side.
pub const MIN_GRID: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A physical `n × n` grid and its dealiased spectral band.
///
/// The band is the sup-norm box `|k|_∞ ≤ K` with `K` the largest integer
/// below `n/3`, so quadratic products alias only outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerGrid {
    n: usize,
    alpha: f64,
    lattice: LatticeBox,
    slots: Vec<usize>,
    /// `1/(2π|k|^{2+α})` per lattice id.
    velocity_gain: Vec<f64>,
}

impl EulerGrid {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < MIN_GRID || n % 2 != 0 {
            return Err(invalid(format!("grid size must be even and at least {MIN_GRID}, got {n}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("α must be positive, got {alpha}")));
        }
        let band = (n - 1) / 3;
        let lattice = build_lattice(2, band as i64)?;
        let wrap = |c: i64| c.rem_euclid(n as i64) as usize;
        let slots = lattice.ids().map(|id| {
            let k = lattice.point(id);
            wrap(k[0]) * n + wrap(k[1])
        });
        let velocity_gain = lattice
            .ids()
            .map(|id| 1.0 / (2.0 * PI * (lattice.norm_sq(id) as f64).powf(1.0 + alpha / 2.0)))
            .collect();
        Ok(Self { n, alpha, slots: slots.collect(), lattice, velocity_gain })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn band(&self) -> i64 {
        self.lattice.radius()
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    /// Row-major grid index holding the coefficient of lattice id `id`.
    pub fn slot(&self, id: usize) -> usize {
        self.slots[id]
    }
}

/// Spectral vorticity on the dealiased band; `ŵ_0 = 0` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityState {
    pub modes: ModeState,
}

impl VorticityState {
    pub fn from_amplitudes(grid: &EulerGrid, amps: Vec<Complex64>) -> Result<Self> {
        Ok(Self { modes: ModeState::from_amplitudes(&grid.lattice, amps)? })
    }

    /// Random phases on `0 < |k|² ≤ max_norm_sq` with `|ŵ_k| ∝ |k|^{-1}`,
    /// scaled to `‖w‖²_{L²} = energy`.
    pub fn random_low_modes<R: Rng + ?Sized>(
        grid: &EulerGrid,
        max_norm_sq: i64,
        energy: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(invalid(format!("energy must be positive, got {energy}")));
        }
        let lat = &grid.lattice;
        let mut amps = vec![ZERO; lat.len()];
        for id in lat.representatives() {
            let n2 = lat.norm_sq(id);
            if n2 <= max_norm_sq {
                let phase = 2.0 * PI * rng.random::<f64>();
                let a = Complex64::from_polar(1.0 / (n2 as f64).sqrt(), phase);
                amps[id] = a;
                amps[lat.pair(id)] = a.conj();
            }
        }
        let e: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if e == 0.0 {
            return Err(invalid(format!("no band modes with |k|² ≤ {max_norm_sq}")));
        }
        let s = (energy / e).sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Self::from_amplitudes(grid, amps)
    }

    pub fn t(&self) -> f64 {
        self.modes.t
    }

    /// `‖w‖²_{L²}`.
    pub fn energy(&self) -> f64 {
        self.modes.energy()
    }

    pub fn h_minus1(&self, grid: &EulerGrid) -> f64 {
        self.modes.h_minus1(&grid.lattice)
    }

    /// `‖∇w‖²_{L²}`.
    pub fn grad_energy(&self, grid: &EulerGrid) -> f64 {
        self.modes.hbeta(&grid.lattice, 1.0)
    }
}

/// `û_k = (i/2π) k^⊥ ŵ_k / |k|^{2+α}` with `k^⊥ = (-k₂, k₁)`, per lattice id.
pub fn velocity_from_vorticity(grid: &EulerGrid, w: &VorticityState) -> Vec<[Complex64; 2]> {
    grid.lattice
        .ids()
        .map(|id| {
            let k = grid.lattice.point(id);
            let s = Complex64::new(0.0, grid.velocity_gain[id]) * w.modes.amps[id];
            [s * (-k[1] as f64), s * k[0] as f64]
        })
        .collect()
}

/// `max_k |k·û_k| / max_k |û_k|`, zero for a zero field.
pub fn divergence_defect(grid: &EulerGrid, u: &[[Complex64; 2]]) -> f64 {
    let mut div: f64 = 0.0;
    let mut size: f64 = 0.0;
    for id in grid.lattice.ids() {
        let k = grid.lattice.point(id);
        div = div.max((u[id][0] * k[0] as f64 + u[id][1] * k[1] as f64).norm());
        size = size.max(u[id][0].norm().max(u[id][1].norm()));
    }
    if size == 0.0 {
        0.0
    } else {
        div / size
    }
}

/// Grid buffers for one nonlinear evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerWorkspace {
    fields: [Vec<Complex64>; 4],
}

impl EulerWorkspace {
    pub fn new(grid: &EulerGrid) -> Self {
        let z = vec![ZERO; grid.n * grid.n];
        Self { fields: [z.clone(), z.clone(), z.clone(), z] }
    }
}

/// Diagnostics of one nonlinear evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearReport {
    /// `max |u(x)|` over the grid.
    pub max_speed: f64,
    /// `|⟨u·∇w, w⟩| / (‖w‖‖∇w‖)`.
    pub orthogonality: f64,
}

/// `-(u·∇w)^_k` on the band, computed on the grid and truncated.
pub fn nonlinear_term<F: Fft2 + ?Sized>(
    grid: &EulerGrid,
    fft: &mut F,
    ws: &mut EulerWorkspace,
    amps: &[Complex64],
    out: &mut Vec<Complex64>,
) -> Result<NonlinearReport> {
    let n = grid.n;
    if fft.size() != n {
        return Err(invalid(format!("transform size {} differs from grid size {n}", fft.size())));
    }
    if amps.len() != grid.lattice.len() {
        return Err(invalid("amplitudes and band sizes differ"));
    }
    let [u1, u2, w1, w2] = &mut ws.fields;
    for f in [&mut *u1, &mut *u2, &mut *w1, &mut *w2] {
        f.iter_mut().for_each(|v| *v = ZERO);
    }
    for id in grid.lattice.ids() {
        let k = grid.lattice.point(id);
        let (k1, k2) = (k[0] as f64, k[1] as f64);
        let slot = grid.slots[id];
        let s = Complex64::new(0.0, grid.velocity_gain[id]) * amps[id];
        u1[slot] = s * -k2;
        u2[slot] = s * k1;
        let g = Complex64::new(0.0, 2.0 * PI) * amps[id];
        w1[slot] = g * k1;
        w2[slot] = g * k2;
    }
    for f in [&mut *u1, &mut *u2, &mut *w1, &mut *w2] {
        fft.inverse(f);
    }
    let mut max_speed: f64 = 0.0;
    for i in 0..n * n {
        let (a, b) = (u1[i].re, u2[i].re);
        max_speed = max_speed.max((a * a + b * b).sqrt());
        u1[i] = Complex64::new(a * w1[i].re + b * w2[i].re, 0.0);
    }
    fft.forward(u1);
    let norm = 1.0 / (n * n) as f64;
    out.clear();
    out.resize(grid.lattice.len(), ZERO);
    for id in grid.lattice.representatives() {
        let v = -u1[grid.slots[id]] * norm;
        out[id] = v;
        out[grid.lattice.pair(id)] = v.conj();
    }
    let inner: f64 = out.iter().zip(amps).map(|(a, b)| (a * b.conj()).re).sum();
    let w2n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let g2n: f64 = grid
        .lattice
        .ids()
        .map(|id| FOUR_PI_SQ * grid.lattice.norm_sq(id) as f64 * amps[id].norm_sqr())
        .sum();
    let scale = (w2n * g2n).sqrt();
    let orthogonality = if scale == 0.0 { 0.0 } else { inner.abs() / scale };
    Ok(NonlinearReport { max_speed, orthogonality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::fft::NaiveDft;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(grid: &EulerGrid, k: [i64; 2], a: Complex64) -> VorticityState {
        let lat = grid.lattice();
        let mut amps = vec![ZERO; lat.len()];
        let id = lat.id_of(&k).unwrap();
        amps[id] = a;
        amps[lat.pair(id)] = a.conj();
        VorticityState::from_amplitudes(grid, amps).unwrap()
    }

    #[test]
    fn band_is_strictly_below_a_third() {
        assert_eq!(EulerGrid::new(12, 0.5).unwrap().band(), 3);
        assert_eq!(EulerGrid::new(64, 0.5).unwrap().band(), 21);
        assert!(EulerGrid::new(10, 0.5).is_err());
        assert!(EulerGrid::new(13, 0.5).is_err());
        assert!(EulerGrid::new(16, 0.0).is_err());
    }

    #[test]
    fn velocity_of_a_single_mode() {
        let g = EulerGrid::new(12, 0.0001).unwrap();
        let w = single(&g, [1, 0], Complex64::new(2.0, 0.0));
        let u = velocity_from_vorticity(&g, &w);
        let id = g.lattice().id_of(&[1, 0]).unwrap();
        assert!(u[id][0].norm() < 1e-15);
        assert!((u[id][1] - Complex64::new(0.0, 2.0 / (2.0 * PI))).norm() < 1e-15);
    }

    #[test]
    fn velocity_is_damped_with_alpha() {
        let w = |a| {
            let g = EulerGrid::new(24, a).unwrap();
            let s = single(&g, [3, 4], Complex64::new(1.0, 0.0));
            let id = g.lattice().id_of(&[3, 4]).unwrap();
            velocity_from_vorticity(&g, &s)[id][1].norm()
        };
        let (a, b) = (w(0.5), w(2.0));
        assert!((a / b - 5f64.powf(1.5)).abs() < 1e-9 * a / b);
    }

    #[test]
    fn curl_of_the_velocity_is_minus_the_vorticity() {
        let g = EulerGrid::new(12, 1e-300).unwrap();
        let w = single(&g, [2, -1], Complex64::new(0.3, -0.7));
        let u = velocity_from_vorticity(&g, &w);
        let id = g.lattice().id_of(&[2, -1]).unwrap();
        let curl = Complex64::new(0.0, 2.0 * PI) * (u[id][1] * 2.0 - u[id][0] * -1.0);
        assert!((curl + w.modes.amps[id]).norm() < 1e-14);
    }

    #[test]
    fn single_mode_does_not_advect_itself() {
        let g = EulerGrid::new(12, 0.5).unwrap();
        let w = single(&g, [1, 2], Complex64::new(0.4, 0.9));
        let mut f = NaiveDft::new(12);
        let mut ws = EulerWorkspace::new(&g);
        let mut out = Vec::new();
        nonlinear_term(&g, &mut f, &mut ws, &w.modes.amps, &mut out).unwrap();
        assert!(out.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn advection_is_orthogonal_and_divergence_free() {
        let g = EulerGrid::new(16, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = VorticityState::random_low_modes(&g, 25, 1.0, &mut rng).unwrap();
        assert!((w.energy() - 1.0).abs() < 1e-14);
        let mut f = NaiveDft::new(16);
        let mut ws = EulerWorkspace::new(&g);
        let mut out = Vec::new();
        let r = nonlinear_term(&g, &mut f, &mut ws, &w.modes.amps, &mut out).unwrap();
        assert!(r.orthogonality < 1e-12, "{}", r.orthogonality);
        assert!(r.max_speed > 0.0);
        assert!(out.iter().any(|v| v.norm() > 1e-6));
        assert!(divergence_defect(&g, &velocity_from_vorticity(&g, &w)) < 1e-15);
    }

    #[test]
    fn nonlinear_term_matches_a_direct_convolution() {
        let g = EulerGrid::new(12, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = VorticityState::random_low_modes(&g, 8, 1.0, &mut rng).unwrap();
        let u = velocity_from_vorticity(&g, &w);
        let lat = g.lattice();
        let mut f = NaiveDft::new(12);
        let mut ws = EulerWorkspace::new(&g);
        let mut out = Vec::new();
        nonlinear_term(&g, &mut f, &mut ws, &w.modes.amps, &mut out).unwrap();
        for id in lat.ids() {
            let k = lat.point(id);
            let mut want = ZERO;
            for p in lat.ids() {
                let q = lat.point(p);
                let r = [k[0] - q[0], k[1] - q[1]];
                if let Some(rid) = lat.id_of(&r) {
                    let dot = u[p][0] * r[0] as f64 + u[p][1] * r[1] as f64;
                    want -= dot * Complex64::new(0.0, 2.0 * PI) * w.modes.amps[rid];
                }
            }
            assert!((out[id] - want).norm() < 1e-13, "{k:?}");
        }
    }
}
