use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::lattice::{dot, norm_sq, LatticeBox};

/// The two step vectors and the four quadrant bases
/// `(l₁, l₂)`, `(l₂, -l₁)`, `(-l₁, -l₂)`, `(-l₂, l₁)`.
///
/// Coordinates are kept as integers scaled by the Gram determinant
/// `G = |l₁|²|l₂|² - (l₁·l₂)²`: `z - h = (A·l₁ + B·l₂)/G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantDecomposition {
    l1: Vec<i64>,
    l2: Vec<i64>,
    l11: i64,
    l12: i64,
    l22: i64,
    gram: i64,
}

impl QuadrantDecomposition {
    pub fn new(l1: &[i64], l2: &[i64]) -> Result<Self> {
        if l1.len() != l2.len() || l1.len() < 2 {
            return Err(invalid("step vectors must share a dimension of at least 2"));
        }
        let (l11, l12, l22) = (norm_sq(l1), dot(l1, l2), norm_sq(l2));
        if l11 == 0 || l22 == 0 {
            return Err(invalid("step vectors must be nonzero"));
        }
        if l11 != l22 {
            return Err(invalid("step vectors must have equal length"));
        }
        let gram = l11 * l22 - l12 * l12;
        if gram == 0 {
            return Err(invalid("step vectors are parallel"));
        }
        Ok(Self { l1: l1.to_vec(), l2: l2.to_vec(), l11, l12, l22, gram })
    }

    pub fn l1(&self) -> &[i64] {
        &self.l1
    }

    pub fn l2(&self) -> &[i64] {
        &self.l2
    }

    pub fn gram(&self) -> i64 {
        self.gram
    }

    /// `|l₁|² = |l₂|²`.
    pub fn step_norm_sq(&self) -> i64 {
        self.l11
    }

    /// Ratio of the extreme eigenvalues of the Gram matrix.
    pub fn condition(&self) -> f64 {
        let (l, c) = (self.l11 as f64, self.l12.abs() as f64);
        (l + c) / (l - c)
    }

    /// Scaled coordinates `(A, B)` of the in-plane part of `z`.
    pub fn coords(&self, z: &[i64]) -> (i64, i64) {
        let (z1, z2) = (dot(z, &self.l1), dot(z, &self.l2));
        (self.l22 * z1 - self.l12 * z2, self.l11 * z2 - self.l12 * z1)
    }

    /// `G·h`, the key of the plane through `z`.
    pub fn plane_key(&self, z: &[i64]) -> Vec<i64> {
        let (a, b) = self.coords(z);
        (0..z.len()).map(|j| self.gram * z[j] - a * self.l1[j] - b * self.l2[j]).collect()
    }

    /// Coordinates of `z - h` in the basis of quadrant `q`.
    pub fn quadrant_coords(&self, q: u8, z: &[i64]) -> (i64, i64) {
        let (a, b) = self.coords(z);
        match q {
            0 => (a, b),
            1 => (b, -a),
            2 => (-a, -b),
            _ => (-b, a),
        }
    }

    /// Basis `(e₁, e₂)` of quadrant `q`.
    pub fn basis(&self, q: u8) -> (Vec<i64>, Vec<i64>) {
        let neg = |v: &[i64]| v.iter().map(|c| -c).collect::<Vec<i64>>();
        match q {
            0 => (self.l1.clone(), self.l2.clone()),
            1 => (self.l2.clone(), neg(&self.l1)),
            2 => (neg(&self.l1), neg(&self.l2)),
            _ => (neg(&self.l2), self.l1.clone()),
        }
    }

    /// Starting classes of `z` in quadrant `q`: class 1 moves along `e₁`
    /// first and starts on the `e₂` ray or where `z - e₂` leaves the
    /// quadrant; class 2 is the mirror image.
    fn start_classes(&self, q: u8, z: &[i64]) -> (bool, bool) {
        let (al, be) = self.quadrant_coords(q, z);
        let g = self.gram;
        let first = (al > 0 && be > 0 && be < g) || (al == 0 && be > 0);
        let second = (al > 0 && be > 0 && al < g) || (be == 0 && al > 0);
        (first, second)
    }
}

/// A plane `h + span(l₁, l₂)` intersected with the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    /// `G·h`.
    pub key: Vec<i64>,
    /// `h`, when it is a nonzero lattice point.
    pub lattice_h: Option<Vec<i64>>,
}

/// `O(n) = start + ⌊(n+1)/2⌋·first + ⌊n/2⌋·second`, truncated where it first
/// leaves the box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub plane: usize,
    pub quadrant: u8,
    /// 1 when the first step is the quadrant's first basis vector, else 2.
    /// Special orbits carry the index of `O_{h,1}` (first step `l₂`) or
    /// `O_{h,2}` (first step `l₁`).
    pub class: u8,
    pub special: bool,
    pub start: Vec<i64>,
    pub first: Vec<i64>,
    pub second: Vec<i64>,
    /// Points inside the box, flattened.
    points: Vec<i64>,
}

impl Orbit {
    /// The untruncated `O(n)`.
    pub fn point(&self, n: usize) -> Vec<i64> {
        let (a, b) = (((n + 1) / 2) as i64, (n / 2) as i64);
        (0..self.start.len()).map(|j| self.start[j] + a * self.first[j] + b * self.second[j]).collect()
    }

    /// `O(n+1) - O(n)`.
    pub fn step(&self, n: usize) -> &[i64] {
        if n % 2 == 0 {
            &self.first
        } else {
            &self.second
        }
    }

    /// Number of points inside the box.
    pub fn len(&self) -> usize {
        self.points.len() / self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// In-box points in orbit order.
    pub fn points(&self) -> impl Iterator<Item = &[i64]> {
        self.points.chunks(self.start.len())
    }
}

/// Orbits on every plane of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSystem {
    pub decomposition: QuadrantDecomposition,
    pub planes: Vec<Plane>,
    pub orbits: Vec<Orbit>,
    radius: i64,
}

impl OrbitSystem {
    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Euclidean radius below which every orbit through a point of plane
    /// `h` starts in the box and stays in it up to that point.
    pub fn certified_radius(&self, margin: i64) -> f64 {
        let step = (self.decomposition.step_norm_sq() as f64).sqrt();
        (self.radius as f64 - margin as f64 * step).max(0.0)
    }

    /// True when `|h|² + κ_G·|k - h|² ≤ certified_radius²`, with `κ_G` the
    /// Gram condition number. All orbit coordinates up to `k` are bounded by
    /// those of `k`, so every such prefix stays inside this ball.
    pub fn is_certified(&self, k: &[i64], margin: i64) -> bool {
        let dec = &self.decomposition;
        let g = dec.gram as f64;
        let key = dec.plane_key(k);
        let h2 = key.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / (g * g);
        let in_plane = (norm_sq(k) as f64 - h2).max(0.0);
        let r = self.certified_radius(margin);
        h2 + dec.condition() * in_plane <= r * r
    }

    /// The backward extension `start - second` is not an admissible start
    /// for an orbit stepping along `second` first in the same quadrant.
    pub fn is_maximal(&self, orbit: &Orbit) -> bool {
        let dec = &self.decomposition;
        let y: Vec<i64> = orbit.start.iter().zip(&orbit.second).map(|(a, b)| a - b).collect();
        let (al, be) = dec.quadrant_coords(orbit.quadrant, &y);
        let (e1, _) = dec.basis(orbit.quadrant);
        if orbit.second == e1 {
            !(be > 0 && al >= 0)
        } else {
            !(al > 0 && be >= 0)
        }
    }
}

fn walk(
    lattice: &LatticeBox,
    plane: usize,
    quadrant: u8,
    class: u8,
    special: bool,
    start: Vec<i64>,
    first: Vec<i64>,
    second: Vec<i64>,
) -> Orbit {
    let mut orbit = Orbit { plane, quadrant, class, special, start, first, second, points: Vec::new() };
    let mut p = orbit.start.clone();
    let mut n = 0;
    while p.iter().all(|c| c.abs() <= lattice.radius()) {
        orbit.points.extend_from_slice(&p);
        let s = if n % 2 == 0 { &orbit.first } else { &orbit.second };
        for (x, y) in p.iter_mut().zip(s) {
            *x += y;
        }
        n += 1;
    }
    orbit
}

fn build(dec: QuadrantDecomposition, lattice: &LatticeBox) -> Result<OrbitSystem> {
    if dec.l1.len() != lattice.dim() {
        return Err(invalid("step vectors and lattice dimensions differ"));
    }
    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for id in lattice.ids() {
        groups.entry(dec.plane_key(lattice.point(id))).or_default().push(id);
    }
    let g = dec.gram;
    let mut planes = Vec::with_capacity(groups.len());
    let mut orbits = Vec::new();
    for (pi, (key, ids)) in groups.into_iter().enumerate() {
        let lattice_h = (key.iter().all(|c| c % g == 0) && key.iter().any(|&c| c != 0))
            .then(|| key.iter().map(|c| c / g).collect::<Vec<i64>>());
        // Starts replaced by the special orbits through h.
        let replaced = lattice_h.as_ref().map(|h| {
            let add = |v: &[i64]| h.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<i64>>();
            (add(&dec.l2), add(&dec.l1))
        });
        for &id in &ids {
            let z = lattice.point(id);
            for q in 0..4u8 {
                let (c1, c2) = dec.start_classes(q, z);
                let (e1, e2) = dec.basis(q);
                let skip = |class: u8| match (&replaced, q, class) {
                    (Some((r1, _)), 0, 1) => r1.as_slice() == z,
                    (Some((_, r2)), 0, 2) => r2.as_slice() == z,
                    _ => false,
                };
                if c1 && !skip(1) {
                    orbits.push(walk(lattice, pi, q, 1, false, z.to_vec(), e1.clone(), e2.clone()));
                }
                if c2 && !skip(2) {
                    orbits.push(walk(lattice, pi, q, 2, false, z.to_vec(), e2, e1));
                }
            }
        }
        if let Some(h) = &lattice_h {
            let o1 = walk(lattice, pi, 0, 1, true, h.clone(), dec.l2.clone(), dec.l1.clone());
            let o2 = walk(lattice, pi, 0, 2, true, h.clone(), dec.l1.clone(), dec.l2.clone());
            orbits.extend([o1, o2].into_iter().filter(|o| !o.is_empty()));
        }
        planes.push(Plane { key, lattice_h });
    }
    Ok(OrbitSystem { decomposition: dec, planes, orbits, radius: lattice.radius() })
}

/// Orbits of the single plane `Z²` with steps `l` and `l^⊥ = (-b, a)`.
pub fn build_orbits_2d(l: &[i64], lattice: &LatticeBox) -> Result<OrbitSystem> {
    if l.len() != 2 || lattice.dim() != 2 {
        return Err(invalid("planar orbits need d = 2"));
    }
    let perp = vec![-l[1], l[0]];
    build(QuadrantDecomposition::new(l, &perp)?, lattice)
}

/// Orbits on every plane `h + span(l₁, l₂)` meeting the box, with the two
/// special orbits through `h` whenever `h` is a nonzero lattice point.
pub fn build_orbits_hd(l1: &[i64], l2: &[i64], lattice: &LatticeBox) -> Result<OrbitSystem> {
    build(QuadrantDecomposition::new(l1, l2)?, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    fn find<'a>(s: &'a OrbitSystem, start: &[i64], class: u8, special: bool) -> Vec<&'a Orbit> {
        s.orbits.iter().filter(|o| o.start == start && o.class == class && o.special == special).collect()
    }

    #[test]
    fn tilted_class_one_orbit() {
        let b = build_lattice(2, 10).unwrap();
        let s = build_orbits_2d(&[2, 1], &b).unwrap();
        let o = find(&s, &[-1, 2], 1, false);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].quadrant, 0);
        let pts: Vec<&[i64]> = o[0].points().take(4).collect();
        assert_eq!(pts, [&[-1, 2][..], &[1, 3], &[0, 5], &[2, 6]]);
    }

    #[test]
    fn axis_class_two_orbit() {
        let b = build_lattice(2, 5).unwrap();
        let s = build_orbits_2d(&[1, 0], &b).unwrap();
        let o = find(&s, &[1, 0], 2, false);
        let o = o.iter().find(|o| o.quadrant == 0).unwrap();
        let pts: Vec<Vec<i64>> = (0..4).map(|n| o.point(n)).collect();
        assert_eq!(pts, [vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn orbits_enter_the_open_quadrant() {
        let b = build_lattice(2, 12).unwrap();
        for l in [[1, 0], [2, 1], [1, -2], [3, 0]] {
            let s = build_orbits_2d(&l, &b).unwrap();
            for o in &s.orbits {
                assert!(s.is_maximal(o));
                for n in 1..6 {
                    let (al, be) = s.decomposition.quadrant_coords(o.quadrant, &o.point(n));
                    assert!(al > 0 && be > 0);
                }
                for n in 0..4 {
                    assert_ne!(o.step(n), o.step(n + 1));
                }
            }
        }
    }

    #[test]
    fn special_orbits_through_h() {
        let b = build_lattice(3, 3).unwrap();
        let s = build_orbits_hd(&[1, 0, 0], &[0, 1, 0], &b).unwrap();
        let o = find(&s, &[0, 0, 1], 1, true);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].point(1), vec![0, 1, 1]);
        assert_eq!(o[0].point(2), vec![1, 1, 1]);
        assert_eq!(find(&s, &[0, 0, 1], 2, true)[0].point(1), vec![1, 0, 1]);
        // The replaced ordinary starts are gone.
        assert!(find(&s, &[0, 1, 1], 1, false).iter().all(|o| o.quadrant != 0));
        let origin = s.planes.iter().find(|p| p.key.iter().all(|&c| c == 0)).unwrap();
        assert_eq!(origin.lattice_h, None);
    }

    #[test]
    fn pair_validation() {
        assert!(QuadrantDecomposition::new(&[1, 1, 0], &[1, -1, 0]).is_ok());
        assert!(QuadrantDecomposition::new(&[1, 0, 0], &[2, 0, 0]).is_err());
        assert!(QuadrantDecomposition::new(&[1, 0, 0], &[-1, 0, 0]).is_err());
        assert!(QuadrantDecomposition::new(&[1, 0, 0], &[1, 1, 0]).is_err());
        assert!(QuadrantDecomposition::new(&[0, 0], &[0, 0]).is_err());
    }
}
