//! Radially symmetric, `ℓ²`-normalized noise coefficients `θ`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{is_lex_positive, norm_sq, sup_norm, LatticeBox};

/// Relative tolerance when comparing explicit values on a common shell.
const SHELL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaFamily {
    /// Equal weight on the `2d` unit vectors.
    UnitShell,
    /// Equal weight on every lattice point with `|k| ≤ radius`.
    Shells { radius: f64 },
    /// `θ_k ∝ |k|^{-(1+α)}` for `0 < |k| ≤ cutoff`.
    PowerLaw { alpha: f64, cutoff: f64 },
    /// Explicit `(k, θ_k)` list; every shell it touches must be complete and
    /// constant.
    Explicit(Vec<(Vec<i64>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEntry {
    pub k: Vec<i64>,
    pub norm_sq: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCoefficients {
    dim: usize,
    entries: Vec<ThetaEntry>,
    support_radius: f64,
    support_sup: i64,
    h_minus1: f64,
    h_plus1: f64,
    /// Sum of squares before normalization, i.e. `K_α²` for the power law.
    raw_norm_sq: f64,
}

impl ThetaCoefficients {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support in lexicographic order.
    pub fn entries(&self) -> &[ThetaEntry] {
        &self.entries
    }

    /// Support points with a lexicographically positive vector.
    pub fn representatives(&self) -> impl Iterator<Item = &ThetaEntry> {
        self.entries.iter().filter(|e| is_lex_positive(&e.k))
    }

    pub fn value(&self, k: &[i64]) -> f64 {
        self.entries
            .binary_search_by(|e| e.k.as_slice().cmp(k))
            .map_or(0.0, |i| self.entries[i].value)
    }

    /// Largest Euclidean norm in the support.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Largest sup-norm in the support.
    pub fn support_sup_norm(&self) -> i64 {
        self.support_sup
    }

    /// Sum of squares of the unnormalized family (`K_α²` for the power law).
    pub fn raw_norm_sq(&self) -> f64 {
        self.raw_norm_sq
    }

    /// `‖θ‖²_{h^β} = Σ θ_k² |k|^{2β}`.
    pub fn hnorm(&self, beta: f64) -> f64 {
        if beta == -1.0 {
            self.h_minus1
        } else if beta == 1.0 {
            self.h_plus1
        } else {
            hnorm_sum(&self.entries, beta)
        }
    }

    pub fn h_minus1(&self) -> f64 {
        self.h_minus1
    }

    pub fn h_plus1(&self) -> f64 {
        self.h_plus1
    }
}

fn hnorm_sum(entries: &[ThetaEntry], beta: f64) -> f64 {
    entries
        .iter()
        .map(|e| {
            let n2 = e.norm_sq as f64;
            let w = if beta == 0.0 {
                1.0
            } else if beta == 1.0 {
                n2
            } else if beta == -1.0 {
                1.0 / n2
            } else {
                n2.powf(beta)
            };
            e.value * e.value * w
        })
        .sum()
}

/// `‖θ‖²_{h^β}`.
pub fn theta_hnorm(theta: &ThetaCoefficients, beta: f64) -> f64 {
    theta.hnorm(beta)
}

/// Builds normalized coefficients of `family` on the points of `lattice`.
pub fn make_theta(family: &ThetaFamily, lattice: &LatticeBox) -> Result<ThetaCoefficients> {
    let d = lattice.dim();
    let radius = lattice.radius();
    let ball = |r: f64| -> Result<i64> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidArgument(format!("support radius must be ≥ 1, got {r}")));
        }
        if r.floor() as i64 > radius {
            return Err(Error::SupportExceedsLattice(format!(
                "radius {r} does not fit in a box of radius {radius}"
            )));
        }
        Ok(max_norm_sq_within(r))
    };
    let raw: Vec<(Vec<i64>, f64)> = match family {
        ThetaFamily::UnitShell => shell_points(lattice, |n2| n2 == 1, |_| 1.0),
        ThetaFamily::Shells { radius: r } => {
            let cap = ball(*r)?;
            shell_points(lattice, |n2| n2 <= cap, |_| 1.0)
        }
        ThetaFamily::PowerLaw { alpha, cutoff } => {
            if !(alpha.is_finite() && *alpha >= 0.0) {
                return Err(Error::InvalidArgument(format!("power-law exponent must be ≥ 0, got {alpha}")));
            }
            let cap = ball(*cutoff)?;
            let a = *alpha;
            shell_points(lattice, |n2| n2 <= cap, |n2| (n2 as f64).powf(-(1.0 + a) / 2.0))
        }
        ThetaFamily::Explicit(list) => explicit_points(list, lattice)?,
    };
    if raw.is_empty() {
        return Err(Error::EmptySupport);
    }
    let raw_norm_sq: f64 = raw.iter().map(|(_, v)| v * v).sum();
    if raw_norm_sq <= 0.0 {
        return Err(Error::EmptySupport);
    }
    let scale = 1.0 / raw_norm_sq.sqrt();
    let entries: Vec<ThetaEntry> = raw
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, v)| ThetaEntry { norm_sq: norm_sq(&k), k, value: v * scale })
        .collect();
    let support_radius = entries.iter().map(|e| e.norm_sq).max().map_or(0.0, |m| (m as f64).sqrt());
    let support_sup = entries.iter().map(|e| sup_norm(&e.k)).max().unwrap_or(0);
    Ok(ThetaCoefficients {
        dim: d,
        h_minus1: hnorm_sum(&entries, -1.0),
        h_plus1: hnorm_sum(&entries, 1.0),
        entries,
        support_radius,
        support_sup,
        raw_norm_sq,
    })
}

/// Largest integer `m` with `m ≤ r²`, computed without trusting `r*r` at
/// integer boundaries.
fn max_norm_sq_within(r: f64) -> i64 {
    let mut m = (r * r).floor() as i64;
    while (m as f64) > r * r {
        m -= 1;
    }
    while ((m + 1) as f64) <= r * r {
        m += 1;
    }
    m
}

fn shell_points(
    lattice: &LatticeBox,
    keep: impl Fn(i64) -> bool,
    weight: impl Fn(i64) -> f64,
) -> Vec<(Vec<i64>, f64)> {
    lattice
        .ids()
        .filter_map(|id| {
            let n2 = lattice.norm_sq(id);
            keep(n2).then(|| (lattice.point(id).to_vec(), weight(n2)))
        })
        .collect()
}

fn explicit_points(list: &[(Vec<i64>, f64)], lattice: &LatticeBox) -> Result<Vec<(Vec<i64>, f64)>> {
    let d = lattice.dim();
    let mut sorted: Vec<(Vec<i64>, f64)> = Vec::with_capacity(list.len());
    for (k, v) in list {
        if k.len() != d {
            return Err(Error::InvalidArgument(format!("vector {k:?} is not {d}-dimensional")));
        }
        if norm_sq(k) == 0 {
            return Err(Error::InvalidArgument("zero vector in explicit coefficients".into()));
        }
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidArgument(format!("coefficient {v} at {k:?} is not a nonnegative number")));
        }
        sorted.push((k.clone(), *v));
    }
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("duplicate vector in explicit coefficients".into()));
    }
    let mut shells: Vec<i64> = sorted.iter().map(|(k, _)| norm_sq(k)).collect();
    shells.sort_unstable();
    shells.dedup();
    for &s in &shells {
        let r = max_root(s);
        if r > lattice.radius() {
            return Err(Error::SupportExceedsLattice(format!(
                "shell |k|² = {s} reaches beyond the box radius {}",
                lattice.radius()
            )));
        }
        let reference = sorted.iter().find(|(k, _)| norm_sq(k) == s).map(|(_, v)| *v).unwrap_or(0.0);
        for id in lattice.ids().filter(|&id| lattice.norm_sq(id) == s) {
            let k = lattice.point(id);
            let v = sorted
                .binary_search_by(|e| e.0.as_slice().cmp(k))
                .map_or(0.0, |i| sorted[i].1);
            if (v - reference).abs() > SHELL_TOLERANCE * reference.abs().max(v.abs()) {
                return Err(Error::NonSymmetric(format!(
                    "θ{k:?} = {v} differs from {reference} on the shell |k|² = {s}"
                )));
            }
        }
    }
    Ok(sorted)
}

/// `⌊√s⌋` in exact integer arithmetic.
fn max_root(s: i64) -> i64 {
    let mut r = (s as f64).sqrt() as i64;
    while r * r > s {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= s {
        r += 1;
    }
    r
}
