//! The α-regularized stochastic 2D Euler equation in vorticity form,
//!
//! `dw + u·∇w dt = κΔw dt + √(2κ) Σ_k θ_k σ_k·∇w dW^k`,
//! `û_k = (i/2π) k^⊥ ŵ_k / |k|^{2+α}`,
//!
//! solved pseudo-spectrally with 2/3 dealiasing. The transform is abstract
//! ([`Fft2`]) so that the companion crate can plug in a fast backend.

mod fft;
mod flow;
mod girsanov;
mod step;

pub use fft::{Fft2, NaiveDft};
pub use flow::{
    divergence_defect, nonlinear_term, velocity_from_vorticity, EulerGrid, EulerWorkspace, NonlinearReport,
    VorticityState, MIN_GRID,
};
pub use girsanov::{
    decay_budget, drift_shift, girsanov_diagnostics, kappa_for_target_rate, power_law_theta, GirsanovLedger,
    KappaSizing,
};
pub use step::{EulerSolver, StepReport, CFL_LIMIT};

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::mc::path_rng;
use crate::theta::ThetaCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    EulerMaruyama,
    /// Noise-free only.
    LawsonRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerRunConfig {
    pub dt: f64,
    pub steps: usize,
    pub sample_stride: usize,
    pub noise: bool,
    pub integrator: Integrator,
}

impl EulerRunConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) || self.steps == 0 {
            return Err(invalid(format!("need dt > 0 and at least one step, got {} and {}", self.dt, self.steps)));
        }
        if self.noise && self.integrator == Integrator::LawsonRk4 {
            return Err(invalid("the RK4 integrator is deterministic; switch the noise off"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerPathRecord {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub h_minus1: Vec<f64>,
    /// Present when `κ > 0`.
    pub girsanov: Option<GirsanovLedger>,
    /// Drift shifts at the final time, when `κ > 0`.
    pub drift_shift: Vec<(Vec<i64>, f64)>,
    pub max_divergence: f64,
    pub max_orthogonality: f64,
    pub max_speed: f64,
}

/// Simulates one path; the noise stream is `path_rng(base_seed, path)`.
pub fn simulate_euler_path<F: Fft2 + ?Sized>(
    solver: &EulerSolver,
    theta: &ThetaCoefficients,
    fft: &mut F,
    w0: &VorticityState,
    cfg: &EulerRunConfig,
    base_seed: u64,
    path: u64,
) -> Result<EulerPathRecord> {
    cfg.validate()?;
    let mut solver = solver.clone();
    let mut ws = EulerWorkspace::new(&solver.grid);
    let mut rng = path_rng(base_seed, path);
    let factors = solver.system.factors(cfg.dt);
    let mut draw = solver.system.zero_draw(cfg.dt);
    let mut w = w0.clone();
    let stride = cfg.sample_stride.max(1);
    let mut rec = EulerPathRecord {
        times: Vec::new(),
        energy: Vec::new(),
        h_minus1: Vec::new(),
        girsanov: None,
        drift_shift: Vec::new(),
        max_divergence: 0.0,
        max_orthogonality: 0.0,
        max_speed: 0.0,
    };
    let grid = solver.grid.clone();
    let push = |rec: &mut EulerPathRecord, w: &VorticityState| {
        rec.times.push(w.t());
        rec.energy.push(w.energy());
        rec.h_minus1.push(w.h_minus1(&grid));
    };
    push(&mut rec, &w);
    for step in 1..=cfg.steps {
        let r = match cfg.integrator {
            Integrator::EulerMaruyama => {
                if cfg.noise {
                    draw.refill(&mut rng);
                }
                solver.em_step(fft, &mut ws, &mut w, &draw, &factors)?
            }
            Integrator::LawsonRk4 => solver.rk4_step(fft, &mut ws, &mut w, cfg.dt)?,
        };
        rec.max_divergence = rec.max_divergence.max(r.divergence);
        rec.max_orthogonality = rec.max_orthogonality.max(r.orthogonality);
        rec.max_speed = rec.max_speed.max(r.max_speed);
        if step % stride == 0 || step == cfg.steps {
            push(&mut rec, &w);
        }
    }
    if solver.kappa > 0.0 {
        rec.girsanov = Some(girsanov_diagnostics(&rec.times, &rec.energy, theta.raw_norm_sq(), solver.kappa)?);
        rec.drift_shift = drift_shift(&solver.grid, theta, &w, solver.kappa)?;
    }
    Ok(rec)
}
