use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::fft::Fft2;
use super::flow::{divergence_defect, nonlinear_term, velocity_from_vorticity, EulerGrid, EulerWorkspace, VorticityState};
use crate::error::{invalid, Error, Result};
use crate::mc::{DiagonalFactors, ModeSystem, NoiseDraw};
use crate::theta::ThetaCoefficients;
use crate::PI;

/// Advective Courant limit on `max|u|·dt·2πn/3`.
pub const CFL_LIMIT: f64 = 0.5;

/// Invariant checks of one step, taken at the start-of-step state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub max_speed: f64,
    pub orthogonality: f64,
    pub divergence: f64,
}

/// Vorticity dynamics on a grid: explicit advection, integrating factor on
/// `κΔ` and the transport noise of a [`ModeSystem`] on the band.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerSolver {
    pub grid: EulerGrid,
    pub system: ModeSystem,
    pub kappa: f64,
    drift: Vec<Complex64>,
}

impl EulerSolver {
    pub fn new(grid: EulerGrid, theta: &ThetaCoefficients, kappa: f64) -> Result<Self> {
        let system = ModeSystem::new(grid.lattice(), theta, kappa, 0.0, 0.0)?;
        Ok(Self { grid, system, kappa, drift: Vec::new() })
    }

    /// Largest `dt` allowed by the advective limit at speed `max_speed`.
    pub fn cfl_budget(&self, max_speed: f64) -> f64 {
        CFL_LIMIT / (max_speed * 2.0 * PI * self.grid.size() as f64 / 3.0)
    }

    fn check_cfl(&self, dt: f64, max_speed: f64) -> Result<()> {
        let budget = self.cfl_budget(max_speed);
        if dt > budget {
            return Err(Error::Unstable { dt, budget });
        }
        Ok(())
    }

    fn report(&self, w: &VorticityState, max_speed: f64, orthogonality: f64) -> StepReport {
        let u = velocity_from_vorticity(&self.grid, w);
        StepReport { max_speed, orthogonality, divergence: divergence_defect(&self.grid, &u) }
    }

    /// One integrating-factor Euler–Maruyama step of the Itô equation.
    pub fn em_step<F: Fft2 + ?Sized>(
        &mut self,
        fft: &mut F,
        ws: &mut EulerWorkspace,
        w: &mut VorticityState,
        draw: &NoiseDraw,
        factors: &DiagonalFactors,
    ) -> Result<StepReport> {
        let dt = factors.dt;
        self.system.check_dt(dt)?;
        let mut drift = core::mem::take(&mut self.drift);
        let nl = nonlinear_term(&self.grid, fft, ws, &w.modes.amps, &mut drift)?;
        self.check_cfl(dt, nl.max_speed)?;
        let report = self.report(w, nl.max_speed, nl.orthogonality);
        drift.iter_mut().for_each(|v| *v *= dt);
        let r = self.system.em_step_forced(&mut w.modes, draw, factors, Some(&drift));
        self.drift = drift;
        r.map(|_| report)
    }

    /// One Lawson RK4 step of the noise-free equation `ẇ = -u·∇w + κΔw`.
    pub fn rk4_step<F: Fft2 + ?Sized>(
        &mut self,
        fft: &mut F,
        ws: &mut EulerWorkspace,
        w: &mut VorticityState,
        dt: f64,
    ) -> Result<StepReport> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        let half = self.system.factors(dt / 2.0).values;
        let full = self.system.factors(dt).values;
        let w0 = w.modes.amps.clone();
        let mut k1 = Vec::new();
        let nl = nonlinear_term(&self.grid, fft, ws, &w0, &mut k1)?;
        self.check_cfl(dt, nl.max_speed)?;
        let report = self.report(w, nl.max_speed, nl.orthogonality);
        let stage = |c: &[Complex64], h: f64| -> Vec<Complex64> {
            w0.iter().zip(c).zip(&half).map(|((a, b), e)| (a + b * h) * e).collect()
        };
        let mut k2 = Vec::new();
        nonlinear_term(&self.grid, fft, ws, &stage(&k1, dt / 2.0), &mut k2)?;
        let w3: Vec<Complex64> = w0.iter().zip(&k2).zip(&half).map(|((a, b), e)| a * e + b * (dt / 2.0)).collect();
        let mut k3 = Vec::new();
        nonlinear_term(&self.grid, fft, ws, &w3, &mut k3)?;
        let w4: Vec<Complex64> = w0
            .iter()
            .zip(&k3)
            .zip(half.iter().zip(&full))
            .map(|((a, b), (h, f))| a * f + b * (dt * h))
            .collect();
        let mut k4 = Vec::new();
        nonlinear_term(&self.grid, fft, ws, &w4, &mut k4)?;
        for id in 0..w0.len() {
            let v = w0[id] * full[id]
                + (k1[id] * full[id] + (k2[id] + k3[id]) * (2.0 * half[id]) + k4[id]) * (dt / 6.0);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { step: w.modes.step + 1 });
            }
            w.modes.amps[id] = v;
        }
        w.modes.step += 1;
        w.modes.t += dt;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::fft::NaiveDft;
    use crate::euler::power_law_theta;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(kappa: f64) -> (EulerSolver, VorticityState, NaiveDft, EulerWorkspace) {
        let grid = EulerGrid::new(16, 0.5).unwrap();
        let theta = power_law_theta(grid.lattice(), 0.5, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = VorticityState::random_low_modes(&grid, 9, 1.0, &mut rng).unwrap();
        let ws = EulerWorkspace::new(&grid);
        (EulerSolver::new(grid, &theta, kappa).unwrap(), w, NaiveDft::new(16), ws)
    }

    #[test]
    fn inviscid_rk4_conserves_enstrophy() {
        let (mut s, mut w, mut f, mut ws) = setup(0.0);
        let e0 = w.energy();
        for _ in 0..50 {
            let r = s.rk4_step(&mut f, &mut ws, &mut w, 2e-3).unwrap();
            assert!(r.orthogonality < 1e-12);
        }
        assert!(((w.energy() - e0) / e0).abs() < 1e-9, "{}", w.energy() - e0);
        assert!((w.t() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn diffusion_strictly_dissipates() {
        let (mut s, mut w, mut f, mut ws) = setup(0.05);
        let mut last = w.energy();
        for _ in 0..10 {
            s.rk4_step(&mut f, &mut ws, &mut w, 1e-3).unwrap();
            assert!(w.energy() < last);
            last = w.energy();
        }
    }

    #[test]
    fn noise_free_em_matches_rk4_to_first_order() {
        let (mut s, w, mut f, mut ws) = setup(0.05);
        let dt = 1e-4;
        let (mut a, mut b) = (w.clone(), w.clone());
        let fac = s.system.factors(dt);
        let draw = s.system.zero_draw(dt);
        for _ in 0..20 {
            s.em_step(&mut f, &mut ws, &mut a, &draw, &fac).unwrap();
            s.rk4_step(&mut f, &mut ws, &mut b, dt).unwrap();
        }
        let diff: f64 = a.modes.amps.iter().zip(&b.modes.amps).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-5, "{diff}");
    }

    #[test]
    fn steps_beyond_the_budget_are_refused() {
        let (mut s, mut w, mut f, mut ws) = setup(1.0);
        let dt = 1.0;
        let fac = s.system.factors(dt);
        let draw = s.system.zero_draw(dt);
        assert!(matches!(s.em_step(&mut f, &mut ws, &mut w, &draw, &fac), Err(Error::Unstable { .. })));
        let (mut s, mut w, mut f, mut ws) = setup(0.0);
        assert!(matches!(s.rk4_step(&mut f, &mut ws, &mut w, 10.0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn noisy_steps_keep_reality_and_energy_control() {
        let (mut s, mut w, mut f, mut ws) = setup(0.05);
        let dt = 1e-4;
        let fac = s.system.factors(dt);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut draw = s.system.zero_draw(dt);
        let e0 = w.energy();
        for _ in 0..200 {
            draw.refill(&mut rng);
            let r = s.em_step(&mut f, &mut ws, &mut w, &draw, &fac).unwrap();
            assert!(r.divergence < 1e-15 && r.orthogonality < 1e-12);
        }
        assert_eq!(crate::mc::realness_defect(s.grid.lattice(), &w.modes), 0.0);
        assert!(w.energy() < e0 * 1.01);
    }
}
