use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::system::{ModeState, ModeSystem};
use crate::error::{invalid, Error, Result};
use crate::lattice::LatticeBox;

/// Slack for deciding which steps fall inside an interval.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub dt: f64,
    pub steps: usize,
    /// Norms are recorded every `sample_stride` steps and at the last step.
    pub sample_stride: usize,
    /// Steps at which all mode powers are recorded.
    pub checkpoints: Vec<usize>,
    /// Sub-interval length for the sup statistics.
    pub tau: Option<f64>,
    /// When false every increment is zero.
    pub noise: bool,
}

impl McConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
            return Err(invalid(format!("dt and T must be positive, got {dt} and {t_end}")));
        }
        let steps = (t_end / dt - GRID_SLACK).ceil() as usize;
        Ok(Self { dt, steps, sample_stride: 1, checkpoints: vec![steps], tau: None, noise: true })
    }

    pub fn t_end(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn sample_steps(&self) -> Vec<usize> {
        let stride = self.sample_stride.max(1);
        let mut s: Vec<usize> = (0..=self.steps).step_by(stride).collect();
        if s.last() != Some(&self.steps) {
            s.push(self.steps);
        }
        s
    }

    /// Inclusive step ranges `ceil(nτ/dt)..=floor((n+1)τ/dt)` of the complete
    /// intervals inside `[0, T]`.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let Some(tau) = self.tau else { return Vec::new() };
        let ratio = tau / self.dt;
        let mut out = Vec::new();
        let mut n = 0usize;
        loop {
            let a = (n as f64 * ratio - GRID_SLACK).ceil() as usize;
            let b = ((n + 1) as f64 * ratio + GRID_SLACK).floor() as usize;
            if b > self.steps {
                break;
            }
            out.push((a, b.max(a)));
            n += 1;
        }
        out
    }

    fn validate(&self, system: &ModeSystem) -> Result<()> {
        system.check_dt(self.dt)?;
        if self.steps == 0 {
            return Err(invalid("at least one step is required"));
        }
        if let Some(c) = self.checkpoints.iter().find(|&&c| c > self.steps) {
            return Err(invalid(format!("checkpoint step {c} is past the last step {}", self.steps)));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(invalid(format!("τ must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Everything one path contributes to the ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub energy: Vec<f64>,
    pub h_minus1: Vec<f64>,
    /// Mode powers `|û_k|²` at each checkpoint.
    pub modes: Vec<Vec<f64>>,
    /// `max ‖u‖²_{H^{-1}}` over the steps of each interval.
    pub interval_sups: Vec<f64>,
}

/// The ChaCha8 stream of path `path` under `base_seed`.
pub fn path_rng(base_seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(path);
    rng
}

/// Simulates one path from `u0`.
pub fn simulate_path(
    lattice: &LatticeBox,
    system: &ModeSystem,
    cfg: &McConfig,
    u0: &ModeState,
    base_seed: u64,
    path: u64,
) -> Result<PathRecord> {
    cfg.validate(system)?;
    let mut rng = path_rng(base_seed, path);
    let factors = system.factors(cfg.dt);
    let mut draw = system.zero_draw(cfg.dt);
    let samples = cfg.sample_steps();
    let intervals = cfg.intervals();
    let mut state = u0.clone();
    let mut rec = PathRecord {
        energy: Vec::with_capacity(samples.len()),
        h_minus1: Vec::with_capacity(samples.len()),
        modes: Vec::with_capacity(cfg.checkpoints.len()),
        interval_sups: vec![f64::NEG_INFINITY; intervals.len()],
    };
    let mut next_sample = 0;
    let mut first_open = 0;
    for step in 0..=cfg.steps {
        if step > 0 {
            if cfg.noise {
                draw.refill(&mut rng);
            }
            system.em_step(&mut state, &draw, &factors)?;
        }
        let h = state.h_minus1(lattice);
        if !h.is_finite() {
            return Err(Error::NonFinite { step });
        }
        while first_open < intervals.len() && intervals[first_open].1 < step {
            first_open += 1;
        }
        for (n, &(a, b)) in intervals.iter().enumerate().skip(first_open) {
            if a > step {
                break;
            }
            if step <= b {
                rec.interval_sups[n] = rec.interval_sups[n].max(h);
            }
        }
        if next_sample < samples.len() && samples[next_sample] == step {
            rec.energy.push(state.energy());
            rec.h_minus1.push(h);
            next_sample += 1;
        }
        for &c in &cfg.checkpoints {
            if c == step {
                rec.modes.push(state.powers());
            }
        }
    }
    Ok(rec)
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub se: f64,
}

impl Moments {
    /// Folds `values` in order.
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        let mean = sum / n as f64;
        if n < 2 {
            return Self { mean, se: f64::NAN };
        }
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        Self { mean, se: (ss / (n - 1) as f64 / n as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub paths: usize,
    pub base_seed: u64,
    pub dt: f64,
    pub tau: Option<f64>,
    pub times: Vec<f64>,
    pub energy: Vec<Moments>,
    pub h_minus1: Vec<Moments>,
    /// `(time, per-mode moments of |û_k|²)` at each checkpoint.
    pub modes: Vec<(f64, Vec<Moments>)>,
    pub interval_sup: Vec<Moments>,
    /// Per-path interval sups, in path order.
    pub path_interval_sups: Vec<Vec<f64>>,
}

/// Combines per-path records in path order.
pub fn aggregate(cfg: &McConfig, base_seed: u64, records: &[PathRecord]) -> Result<EnsembleStats> {
    if records.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: records.len() });
    }
    let samples = cfg.sample_steps();
    let series = |f: &dyn Fn(&PathRecord) -> &Vec<f64>, i: usize| Moments::of(records.iter().map(move |r| f(r)[i]));
    let energy = (0..samples.len()).map(|i| series(&|r| &r.energy, i)).collect();
    let h_minus1 = (0..samples.len()).map(|i| series(&|r| &r.h_minus1, i)).collect();
    let modes = cfg
        .checkpoints
        .iter()
        .enumerate()
        .map(|(c, &step)| {
            let n = records[0].modes[c].len();
            let m = (0..n).map(|k| Moments::of(records.iter().map(move |r| r.modes[c][k]))).collect();
            (step as f64 * cfg.dt, m)
        })
        .collect();
    let intervals = records[0].interval_sups.len();
    let interval_sup = (0..intervals).map(|i| series(&|r| &r.interval_sups, i)).collect();
    Ok(EnsembleStats {
        paths: records.len(),
        base_seed,
        dt: cfg.dt,
        tau: cfg.tau,
        times: samples.iter().map(|&s| s as f64 * cfg.dt).collect(),
        energy,
        h_minus1,
        modes,
        interval_sup,
        path_interval_sups: records.iter().map(|r| r.interval_sups.clone()).collect(),
    })
}

/// Sequential ensemble; paths `0..paths` with streams from `base_seed`.
pub fn simulate_ensemble(
    lattice: &LatticeBox,
    system: &ModeSystem,
    cfg: &McConfig,
    u0: &ModeState,
    paths: usize,
    base_seed: u64,
) -> Result<EnsembleStats> {
    if paths < 2 {
        return Err(invalid(format!("at least 2 paths are required, got {paths}")));
    }
    let records = (0..paths as u64)
        .map(|p| simulate_path(lattice, system, cfg, u0, base_seed, p))
        .collect::<Result<Vec<_>>>()?;
    aggregate(cfg, base_seed, &records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::spectrum::SpectrumState;
    use crate::theta::{make_theta, ThetaFamily};

    fn setup() -> (LatticeBox, ModeSystem, ModeState) {
        let b = build_lattice(2, 4).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let sys = ModeSystem::new(&b, &t, 1.0, 0.0, 0.0).unwrap();
        let u0 = ModeState::from_spectrum(&b, &SpectrumState::shell(&b, 2, 1.0).unwrap()).unwrap();
        (b, sys, u0)
    }

    #[test]
    fn interval_ranges() {
        let mut c = McConfig::new(1e-5, 1e-4).unwrap();
        assert_eq!(c.steps, 10);
        c.tau = Some(2.5e-5);
        assert_eq!(c.intervals(), vec![(0, 2), (3, 5), (5, 7), (8, 10)]);
        c.sample_stride = 4;
        assert_eq!(c.sample_steps(), vec![0, 4, 8, 10]);
    }

    #[test]
    fn initial_energy_is_exact_and_runs_repeat() {
        let (b, sys, u0) = setup();
        let mut c = McConfig::new(1e-5, 2e-4).unwrap();
        c.tau = Some(5e-5);
        let s1 = simulate_ensemble(&b, &sys, &c, &u0, 8, 11).unwrap();
        let s2 = simulate_ensemble(&b, &sys, &c, &u0, 8, 11).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.energy[0].mean, u0.energy());
        assert_eq!(s1.energy[0].se, 0.0);
        assert_eq!(s1.interval_sup.len(), 4);
        let s3 = simulate_ensemble(&b, &sys, &c, &u0, 8, 12).unwrap();
        assert_ne!(s1.energy.last(), s3.energy.last());
    }

    #[test]
    fn paths_use_distinct_streams() {
        let (b, sys, u0) = setup();
        let c = McConfig::new(1e-5, 1e-4).unwrap();
        let a = simulate_path(&b, &sys, &c, &u0, 5, 0).unwrap();
        let d = simulate_path(&b, &sys, &c, &u0, 5, 1).unwrap();
        assert_ne!(a.modes, d.modes);
    }
}
