use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::noise::NoiseDraw;
use crate::error::{invalid, Error, Result};
use crate::frame::FrameSet;
use crate::lattice::{perp_numerator, LatticeBox};
use crate::spectrum::SpectrumState;
use crate::theta::ThetaCoefficients;
use crate::{FOUR_PI_SQ, PI};

/// Complex amplitudes `û_k` indexed by lattice id.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub t: f64,
    pub step: usize,
    pub amps: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl ModeState {
    /// Real amplitudes `√Y_k`, so that `|û_k(0)|² = Y_k`.
    pub fn from_spectrum(lattice: &LatticeBox, y: &SpectrumState) -> Result<Self> {
        if y.values.len() != lattice.len() {
            return Err(invalid("spectrum and lattice sizes differ"));
        }
        let amps = y.values.iter().map(|v| Complex64::new(v.sqrt(), 0.0)).collect();
        Ok(Self { t: y.t, step: 0, amps, scratch: Vec::new() })
    }

    /// Accepts amplitudes that satisfy `û_{-k} = conj(û_k)` exactly.
    pub fn from_amplitudes(lattice: &LatticeBox, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != lattice.len() {
            return Err(invalid("amplitude and lattice sizes differ"));
        }
        let s = Self { t: 0.0, step: 0, amps, scratch: Vec::new() };
        if realness_defect(lattice, &s) != 0.0 {
            return Err(invalid("amplitudes violate û_{-k} = conj(û_k)"));
        }
        Ok(s)
    }

    /// `Σ_k |û_k|² = ‖u‖²_{L²}`.
    pub fn energy(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ_k |2πk|^{2β}|û_k|²`.
    pub fn hbeta(&self, lattice: &LatticeBox, beta: f64) -> f64 {
        lattice
            .ids()
            .map(|id| (FOUR_PI_SQ * lattice.norm_sq(id) as f64).powf(beta) * self.amps[id].norm_sqr())
            .sum()
    }

    /// `Σ_k |û_k|²/|2πk|²`.
    pub fn h_minus1(&self, lattice: &LatticeBox) -> f64 {
        lattice.ids().map(|id| self.amps[id].norm_sqr() / (FOUR_PI_SQ * lattice.norm_sq(id) as f64)).sum()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `max_k |û_{-k} - conj(û_k)|`.
pub fn realness_defect(lattice: &LatticeBox, state: &ModeState) -> f64 {
    if state.amps.len() != lattice.len() {
        return f64::INFINITY;
    }
    lattice
        .representatives()
        .map(|id| (state.amps[lattice.pair(id)] - state.amps[id].conj()).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Gain {
    src: u32,
    noise: u32,
    negated: bool,
    coef: f64,
}

/// `e^{(λ - 4π²(κ+ν)|k|²)dt}` per lattice id.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFactors {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Precomputed coupling of the mode equation
///
/// `dû_k = (λ - 4π²(κ+ν)|k|²)û_k dt + 2πi√(C_dκ) Σ_{l,i} θ_l (a_{l,i}·k) û_{k-l} dW^{l,i}`,
///
/// with sources outside the box dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    reps: Vec<usize>,
    pairs: Vec<usize>,
    offsets: Vec<usize>,
    gains: Vec<Gain>,
    rates: Vec<f64>,
    noise_reps: usize,
    per_rep: usize,
    max_rate: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl ModeSystem {
    pub fn new(lattice: &LatticeBox, theta: &ThetaCoefficients, kappa: f64, lambda: f64, nu: f64) -> Result<Self> {
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
        let frames = FrameSet::for_theta(theta)?;
        let d = lattice.dim();
        let c_d = d as f64 / (d as f64 - 1.0);
        let scale = 2.0 * PI * (c_d * kappa).sqrt();
        let reps: Vec<usize> = lattice.representatives().collect();
        let mut offsets = vec![0];
        let mut gains = Vec::new();
        for &id in &reps {
            let k = lattice.point(id);
            for e in theta.entries() {
                if perp_numerator(k, &e.k) == 0 || e.value == 0.0 {
                    continue;
                }
                let Some(src) = lattice.shift(id, &e.k, -1) else { continue };
                let (r, negated) = frames.locate(&e.k).expect("support vector has a frame");
                for i in 0..d - 1 {
                    let ak: f64 = frames.vector(r, i).iter().zip(k).map(|(a, &c)| a * c as f64).sum();
                    let coef = scale * e.value * ak;
                    if coef != 0.0 {
                        gains.push(Gain { src: src as u32, noise: (r * (d - 1) + i) as u32, negated, coef });
                    }
                }
            }
            offsets.push(gains.len());
        }
        let rates: Vec<f64> = lattice
            .ids()
            .map(|id| lambda - FOUR_PI_SQ * (kappa + nu) * lattice.norm_sq(id) as f64)
            .collect();
        Ok(Self {
            pairs: reps.iter().map(|&id| lattice.pair(id)).collect(),
            reps,
            offsets,
            gains,
            rates,
            noise_reps: frames.representatives().len(),
            per_rep: d - 1,
            max_rate: FOUR_PI_SQ * (kappa + nu) * lattice.max_norm_sq() as f64 + lambda,
            kappa,
            lambda,
            nu,
        })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Largest admissible step, `0.5/(4π²(κ+ν)|k|²_max + λ)`.
    pub fn stability_budget(&self) -> f64 {
        0.5 / self.max_rate
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        if dt > self.stability_budget() {
            return Err(Error::Unstable { dt, budget: self.stability_budget() });
        }
        Ok(())
    }

    pub fn factors(&self, dt: f64) -> DiagonalFactors {
        DiagonalFactors { dt, values: self.rates.iter().map(|c| (c * dt).exp()).collect() }
    }

    /// An all-zero draw of the right shape.
    pub fn zero_draw(&self, dt: f64) -> NoiseDraw {
        NoiseDraw::zeros(self.noise_reps, self.per_rep, dt)
    }

    /// One integrating-factor Euler–Maruyama step
    /// `û_k ← e^{c_k dt}(û_k + Σ i·coef·û_{k-l}·ΔW^{l,i})` on representatives,
    /// followed by conjugate mirroring.
    pub fn em_step(&self, state: &mut ModeState, draw: &NoiseDraw, factors: &DiagonalFactors) -> Result<()> {
        self.em_step_forced(state, draw, factors, None)
    }

    /// As [`ModeSystem::em_step`], with a per-id increment added to `û_k`
    /// before the integrating factor is applied.
    pub fn em_step_forced(
        &self,
        state: &mut ModeState,
        draw: &NoiseDraw,
        factors: &DiagonalFactors,
        forcing: Option<&[Complex64]>,
    ) -> Result<()> {
        if state.amps.len() != self.len() || factors.values.len() != self.len() {
            return Err(invalid("state, factors and system sizes differ"));
        }
        if forcing.is_some_and(|f| f.len() != self.len()) {
            return Err(invalid("forcing and system sizes differ"));
        }
        if draw.dt != factors.dt {
            return Err(invalid("noise and factor step sizes differ"));
        }
        state.scratch.clear();
        let mut finite = true;
        for (j, &id) in self.reps.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for g in &self.gains[self.offsets[j]..self.offsets[j + 1]] {
                let w = draw.get(g.noise as usize / self.per_rep, g.noise as usize % self.per_rep, g.negated);
                acc += state.amps[g.src as usize] * w * g.coef;
            }
            // Multiplication by i.
            let mut v = state.amps[id] + Complex64::new(-acc.im, acc.re);
            if let Some(f) = forcing {
                v += f[id];
            }
            let v = v * factors.values[id];
            finite &= v.re.is_finite() && v.im.is_finite();
            state.scratch.push(v);
        }
        state.step += 1;
        if !finite {
            return Err(Error::NonFinite { step: state.step });
        }
        for (j, &id) in self.reps.iter().enumerate() {
            let v = state.scratch[j];
            state.amps[id] = v;
            state.amps[self.pairs[j]] = v.conj();
        }
        state.t += factors.dt;
        Ok(())
    }
}

/// Exact expectation of `|û_k|²` under the Euler–Maruyama scheme:
/// `Y_k ← e^{2c_k dt}(Y_k + 2dt Σ coef² Y_{k-l})`, applied `steps` times.
pub fn scheme_moment_recursion(system: &ModeSystem, y0: &[f64], dt: f64, steps: usize) -> Result<Vec<f64>> {
    if y0.len() != system.len() {
        return Err(invalid("spectrum and system sizes differ"));
    }
    let f2: Vec<f64> = system.rates.iter().map(|c| (2.0 * c * dt).exp()).collect();
    let mut y = y0.to_vec();
    let mut next = vec![0.0; system.reps.len()];
    for _ in 0..steps {
        for (j, &id) in system.reps.iter().enumerate() {
            let gain: f64 = system.gains[system.offsets[j]..system.offsets[j + 1]]
                .iter()
                .map(|g| g.coef * g.coef * y[g.src as usize])
                .sum();
            next[j] = f2[id] * (y[id] + 2.0 * dt * gain);
        }
        for (j, &id) in system.reps.iter().enumerate() {
            y[id] = next[j];
            y[system.pairs[j]] = next[j];
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::mc::noise::noise_increments;
    use crate::spectrum::{MasterOperator, TruncationPolicy};
    use crate::theta::{make_theta, ThetaFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noise_off_is_diagonal_decay() {
        let b = build_lattice(2, 4).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let sys = ModeSystem::new(&b, &t, 1.0, 0.0, 0.0).unwrap();
        let y0 = SpectrumState::shell(&b, 5, 1.0).unwrap();
        let mut s = ModeState::from_spectrum(&b, &y0).unwrap();
        let dt = 1e-4;
        let f = sys.factors(dt);
        let zero = sys.zero_draw(dt);
        for _ in 0..100 {
            sys.em_step(&mut s, &zero, &f).unwrap();
        }
        for id in b.ids() {
            let expected = y0.values[id].sqrt() * (-FOUR_PI_SQ * b.norm_sq(id) as f64 * 0.01).exp();
            assert!((s.amps[id].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn evolution_keeps_reality_exactly() {
        let b = build_lattice(3, 3).unwrap();
        let t = make_theta(&ThetaFamily::Shells { radius: 1.5 }, &b).unwrap();
        let sys = ModeSystem::new(&b, &t, 0.5, 0.2, 0.1).unwrap();
        let mut s = ModeState::from_spectrum(&b, &SpectrumState::shell(&b, 2, 1.0).unwrap()).unwrap();
        let dt = 1e-4;
        let f = sys.factors(dt);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut draw = noise_increments(t.representatives().count(), 2, dt, &mut rng).unwrap();
        for _ in 0..1000 {
            draw.refill(&mut rng);
            sys.em_step(&mut s, &draw, &f).unwrap();
        }
        assert_eq!(realness_defect(&b, &s), 0.0);
        s.amps[0] += Complex64::new(0.0, 1e-3);
        assert!(realness_defect(&b, &s) > 0.0);
    }

    #[test]
    fn scheme_gains_match_absorbing_operator() {
        // One step of the recursion with dt → 0 reproduces the absorbing rhs.
        let b = build_lattice(2, 5).unwrap();
        let t = make_theta(&ThetaFamily::Shells { radius: 2.0 }, &b).unwrap();
        let sys = ModeSystem::new(&b, &t, 0.8, 0.0, 0.0).unwrap();
        let op = MasterOperator::transport(&b, &t, 0.8, TruncationPolicy::absorbing(2)).unwrap();
        let y: Vec<f64> = b.ids().map(|id| 1.0 + (id % 7) as f64 + (b.pair(id) % 7) as f64).collect();
        let mut rhs = vec![0.0; b.len()];
        op.apply(&y, &mut rhs);
        let dt = 1e-9;
        let y1 = scheme_moment_recursion(&sys, &y, dt, 1).unwrap();
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for id in b.ids() {
            assert!(((y1[id] - y[id]) / dt - rhs[id]).abs() < 1e-5 * scale);
        }
    }

    #[test]
    fn budget_refusal() {
        let b = build_lattice(2, 8).unwrap();
        let t = make_theta(&ThetaFamily::UnitShell, &b).unwrap();
        let sys = ModeSystem::new(&b, &t, 1.0, 0.0, 0.0).unwrap();
        assert!(sys.check_dt(1e-5).is_ok());
        assert!(matches!(sys.check_dt(1e-3), Err(Error::Unstable { .. })));
    }
}
