#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::norms::{hbeta_sum, lp_norm};
use super::operator::MasterOperator;
use super::SpectrumState;
use crate::error::{invalid, Error, Result};
use crate::lattice::LatticeBox;
use crate::FOUR_PI_SQ;

/// Classical RK4 is stable on the negative real axis up to about 2.785; the
/// operator's spectrum lies in `[-2·max_rate, 0]` shifted by `2λ`.
const RK4_REAL_STABILITY: f64 = 2.5;
/// Admissible negative overshoot relative to the total mass.
const NEGATIVITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtPolicy {
    pub safety: f64,
    /// Optional cap on the step.
    pub max_dt: Option<f64>,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self { safety: 0.5, max_dt: None }
    }
}

impl DtPolicy {
    pub fn step(&self, max_rate: f64) -> Result<f64> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(invalid(format!("safety factor must lie in (0, 1], got {}", self.safety)));
        }
        let mut dt = self.safety * RK4_REAL_STABILITY / max_rate;
        if let Some(cap) = self.max_dt {
            if !(cap > 0.0) {
                return Err(invalid(format!("step cap must be positive, got {cap}")));
            }
            dt = dt.min(cap);
        }
        Ok(dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    /// Record every `stride` steps (and always the final step).
    pub stride: usize,
    pub p_list: Vec<f64>,
    pub beta_list: Vec<f64>,
    /// Boundary band width for leakage accounting.
    pub margin: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub lp: Vec<f64>,
    pub hbeta: Vec<f64>,
    /// Fraction of the mass inside the boundary band.
    pub boundary_mass: f64,
    /// Fraction of each `hbeta` sum inside the boundary band.
    pub boundary_hbeta: Vec<f64>,
    pub min_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub p_list: Vec<f64>,
    pub beta_list: Vec<f64>,
    pub samples: Vec<Sample>,
    pub last: SpectrumState,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Series of `‖Y‖_{ℓ^p}` for the `i`-th requested `p`.
    pub fn lp_series(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.lp[i]).collect()
    }

    /// Series of `Σ|2πk|^{2β}Y_k` for the `i`-th requested `β`.
    pub fn hbeta_series(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.hbeta[i]).collect()
    }

    pub fn leakage_series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.boundary_mass).collect()
    }

    /// Boundary share of the `i`-th `hbeta` series.
    pub fn hbeta_leakage_series(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.boundary_hbeta[i]).collect()
    }
}

fn record(lattice: &LatticeBox, y: &[f64], step: usize, t: f64, sampling: &Sampling) -> Sample {
    let mass: f64 = y.iter().sum();
    let band: f64 = lattice
        .ids()
        .filter(|&id| lattice.in_band(id, sampling.margin))
        .map(|id| y[id])
        .sum();
    Sample {
        step,
        t,
        mass,
        lp: sampling.p_list.iter().map(|&p| lp_norm(y, p)).collect(),
        hbeta: sampling.beta_list.iter().map(|&b| hbeta_sum(lattice, y, b)).collect(),
        boundary_mass: if mass == 0.0 { 0.0 } else { band / mass },
        boundary_hbeta: sampling
            .beta_list
            .iter()
            .map(|&b| {
                let (mut all, mut edge) = (0.0, 0.0);
                for id in lattice.ids().filter(|&id| lattice.norm_sq(id) > 0) {
                    let v = (FOUR_PI_SQ * lattice.norm_sq(id) as f64).powf(b) * y[id];
                    all += v;
                    if lattice.in_band(id, sampling.margin) {
                        edge += v;
                    }
                }
                if all == 0.0 {
                    0.0
                } else {
                    edge / all
                }
            })
            .collect(),
        min_value: y.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Integrates `dY/dt = A·Y` from `y0` to `t_end` with classical RK4.
///
/// The step is `safety·2.5/max_rate` rounded down so that an integer number
/// of steps lands on `t_end`.
pub fn integrate(
    lattice: &LatticeBox,
    op: &MasterOperator,
    y0: &SpectrumState,
    t_end: f64,
    policy: DtPolicy,
    sampling: &Sampling,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid(format!("final time must be positive, got {t_end}")));
    }
    if sampling.stride == 0 {
        return Err(invalid("sampling stride must be at least 1"));
    }
    if y0.values.len() != op.len() || op.len() != lattice.len() {
        return Err(invalid("spectrum, operator and lattice sizes differ"));
    }
    if let Some(p) = sampling.p_list.iter().find(|&&p| !(p >= 1.0)) {
        return Err(invalid(format!("ℓ^p norms need p ≥ 1, got {p}")));
    }
    let dt_max = policy.step(op.max_rate())?;
    let steps = (t_end / dt_max).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let n = op.len();
    let mut y = y0.values.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut samples = vec![record(lattice, &y, 0, y0.t, sampling)];
    for step in 1..=steps {
        op.apply(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        op.apply(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        op.apply(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + dt * k3[i];
        }
        op.apply(&tmp, &mut k4);
        let mut mass = 0.0;
        let mut min = f64::INFINITY;
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            mass += y[i];
            min = min.min(y[i]);
        }
        if !mass.is_finite() {
            return Err(Error::NonFinite { step });
        }
        if min < -NEGATIVITY * mass.abs() {
            return Err(Error::Negative { step, value: min, tolerance: NEGATIVITY * mass.abs() });
        }
        if step % sampling.stride == 0 || step == steps {
            samples.push(record(lattice, &y, step, y0.t + step as f64 * dt, sampling));
        }
    }
    Ok(Trajectory {
        dt,
        steps,
        p_list: sampling.p_list.clone(),
        beta_list: sampling.beta_list.clone(),
        samples,
        last: SpectrumState { t: y0.t + t_end, values: y },
    })
}
