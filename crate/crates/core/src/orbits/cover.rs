use alloc::vec;
use alloc::vec::Vec;

use super::plane::{Orbit, OrbitSystem};
use crate::lattice::{perp_numerator, LatticeBox};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub radius: i64,
    pub certified_radius: f64,
    /// Visits per lattice id.
    pub multiplicity: Vec<u32>,
    pub certified_points: usize,
    /// Box points outside the certified region.
    pub truncation_frontier: usize,
    /// Certified points whose multiplicity is not 2.
    pub violations: Vec<(Vec<i64>, u32)>,
}

/// Counts orbit visits per box point and checks multiplicity 2 on the
/// certified region.
pub fn cover_multiplicity(system: &OrbitSystem, lattice: &LatticeBox, margin: i64) -> CoverReport {
    let mut multiplicity = vec![0u32; lattice.len()];
    for o in &system.orbits {
        for p in o.points() {
            if let Some(id) = lattice.id_of(p) {
                multiplicity[id] += 1;
            }
        }
    }
    let mut certified_points = 0;
    let mut violations = Vec::new();
    for id in lattice.ids() {
        let k = lattice.point(id);
        if system.is_certified(k, margin) {
            certified_points += 1;
            if multiplicity[id] != 2 {
                violations.push((k.to_vec(), multiplicity[id]));
            }
        }
    }
    CoverReport {
        radius: lattice.radius(),
        certified_radius: system.certified_radius(margin),
        truncation_frontier: lattice.len() - certified_points,
        multiplicity,
        certified_points,
        violations,
    }
}

/// `|Π^⊥_{ΔO(n)} O(n)|²·c|l₁|²/(n+1)²` with `c = 4` for ordinary orbits and
/// `c = 5` for the special ones.
pub fn projection_ratio(orbit: &Orbit, n: usize) -> f64 {
    let factor = if orbit.special { 5.0 } else { 4.0 };
    let m = (n + 1) as f64;
    // |Δ| = |l₁|, so |l₁|²/|Δ|² cancels.
    factor * perp_numerator(&orbit.point(n), orbit.step(n)) as f64 / (m * m)
}

/// Smallest [`projection_ratio`] over the in-box points. A value of at least
/// 1 certifies the projection lower bound along the orbit.
pub fn projection_bound_margin(orbit: &Orbit) -> f64 {
    (0..orbit.len()).map(|n| projection_ratio(orbit, n)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::orbits::{build_orbits_2d, build_orbits_hd};

    #[test]
    fn axis_cover_is_exactly_twice() {
        let b = build_lattice(2, 10).unwrap();
        let s = build_orbits_2d(&[1, 0], &b).unwrap();
        let r = cover_multiplicity(&s, &b, 3);
        assert_eq!(r.certified_radius, 7.0);
        assert!(r.certified_points > 100);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.certified_points + r.truncation_frontier, b.len());
    }

    #[test]
    fn tilted_cover_and_projection() {
        let b = build_lattice(2, 20).unwrap();
        let s = build_orbits_2d(&[2, 1], &b).unwrap();
        let r = cover_multiplicity(&s, &b, 3);
        assert!(r.violations.is_empty());
        let o = s.orbits.iter().find(|o| o.start == [-1, 2] && o.class == 1).unwrap();
        assert_eq!(projection_ratio(o, 0), 100.0);
        assert_eq!(projection_ratio(o, 1), 25.0);
        assert!(s.orbits.iter().all(|o| projection_bound_margin(o) >= 1.0));
    }

    #[test]
    fn special_orbit_ratio() {
        let b = build_lattice(3, 4).unwrap();
        let s = build_orbits_hd(&[1, 0, 0], &[0, 1, 0], &b).unwrap();
        let o = s.orbits.iter().find(|o| o.special && o.start == [0, 0, 1] && o.class == 1).unwrap();
        assert_eq!(projection_ratio(o, 0), 5.0);
        assert!(projection_bound_margin(o) >= 1.0);
    }
}
