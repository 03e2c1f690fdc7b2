//! The truncated nonzero lattice `{k ∈ Z^d : 0 < |k|_∞ ≤ N}`.
//!
//! Points are stored in lexicographic order. With that order the dense id of
//! `-k` is `len - 1 - id(k)` and the lexicographically positive points (first
//! nonzero coordinate > 0) are exactly the upper half of the ids.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invalid, Result};

/// Largest point count accepted by [`LatticeBox::new`].
pub const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    dim: usize,
    radius: i64,
    side: i64,
    coords: Vec<i64>,
}

impl LatticeBox {
    pub fn new(dim: usize, radius: i64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dim}")));
        }
        if radius < 1 {
            return Err(invalid(format!("radius must be at least 1, got {radius}")));
        }
        let side = 2 * radius + 1;
        let mut total: usize = 1;
        for _ in 0..dim {
            total = total
                .checked_mul(side as usize)
                .filter(|&t| t <= MAX_POINTS + 1)
                .ok_or_else(|| invalid(format!("lattice ({dim}, {radius}) is too large")))?;
        }
        let center = (total - 1) / 2;
        let mut coords = Vec::with_capacity((total - 1) * dim);
        for radix in (0..total).filter(|&r| r != center) {
            let mut rem = radix as i64;
            let start = coords.len();
            coords.resize(start + dim, 0);
            for j in (0..dim).rev() {
                coords[start + j] = rem % side - radius;
                rem /= side;
            }
        }
        Ok(Self { dim, radius, side, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ids(&self) -> Range<usize> {
        0..self.len()
    }

    pub fn point(&self, id: usize) -> &[i64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn id_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim || k.iter().any(|c| c.abs() > self.radius) {
            return None;
        }
        let radix = k.iter().fold(0i64, |acc, &c| acc * self.side + c + self.radius) as usize;
        let center = self.len() / 2;
        match radix.cmp(&center) {
            core::cmp::Ordering::Less => Some(radix),
            core::cmp::Ordering::Equal => None,
            core::cmp::Ordering::Greater => Some(radix - 1),
        }
    }

    /// Id of `-k`.
    pub fn pair(&self, id: usize) -> usize {
        self.len() - 1 - id
    }

    pub fn is_representative(&self, id: usize) -> bool {
        id >= self.len() / 2
    }

    pub fn representatives(&self) -> Range<usize> {
        self.len() / 2..self.len()
    }

    pub fn norm_sq(&self, id: usize) -> i64 {
        norm_sq(self.point(id))
    }

    pub fn sup_norm(&self, id: usize) -> i64 {
        sup_norm(self.point(id))
    }

    /// `d·N²`, the largest `|k|²` in the box.
    pub fn max_norm_sq(&self) -> i64 {
        self.dim as i64 * self.radius * self.radius
    }

    /// True when `|k|_∞ > N - margin`.
    pub fn in_band(&self, id: usize, margin: i64) -> bool {
        self.sup_norm(id) > self.radius - margin
    }

    /// Id of `k + l`, if it is a point of the box.
    pub fn shift(&self, id: usize, l: &[i64], sign: i64) -> Option<usize> {
        let mut buf = [0i64; 8];
        if self.dim <= buf.len() {
            let k = self.point(id);
            for j in 0..self.dim {
                buf[j] = k[j] + sign * l[j];
            }
            self.id_of(&buf[..self.dim])
        } else {
            let v: Vec<i64> = self.point(id).iter().zip(l).map(|(a, b)| a + sign * b).collect();
            self.id_of(&v)
        }
    }
}

/// Builds the lattice box of dimension `d` and sup-norm radius `n`.
pub fn build_lattice(d: usize, n: i64) -> Result<LatticeBox> {
    LatticeBox::new(d, n)
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[i64]) -> i64 {
    dot(a, a)
}

pub fn sup_norm(a: &[i64]) -> i64 {
    a.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// True when the first nonzero coordinate is positive.
pub fn is_lex_positive(a: &[i64]) -> bool {
    a.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Integer numerator `|k|²|l|² - (k·l)²` of `|Π_l^⊥ k|²·|l|²`.
///
/// It is invariant under `k → k + m·l`, which makes transfer rates between
/// `j` and `j + l` bitwise symmetric.
pub fn perp_numerator(k: &[i64], l: &[i64]) -> i64 {
    let kl = dot(k, l);
    norm_sq(k) * norm_sq(l) - kl * kl
}

/// `|Π_l^⊥ k|² = |k|² - (k·l)²/|l|²`.
pub fn perp_proj_sq(k: &[i64], l: &[i64]) -> Result<f64> {
    if k.len() != l.len() {
        return Err(invalid("vectors of different dimensions"));
    }
    let ll = norm_sq(l);
    if ll == 0 {
        return Err(invalid("projection direction is the zero vector"));
    }
    Ok(perp_numerator(k, l) as f64 / ll as f64)
}
