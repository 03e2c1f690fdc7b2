//! Orthonormal frames `{a_{k,i}}` of `k^⊥` with `a_{-k,i} = a_{k,i}`.
//!
//! The frame of `k` is computed on the lexicographically positive member of
//! `{k, -k}`: the canonical basis vectors are orthonormalized against it in
//! index order, skipping vectors whose residual vanishes, and each vector's
//! sign is fixed so that its first nonzero component is positive.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::lattice::{is_lex_positive, norm_sq};
use crate::theta::ThetaCoefficients;

/// Residual norm below which a canonical vector is treated as dependent.
const DEPENDENT: f64 = 1e-9;
/// Components below this magnitude are ignored when fixing signs.
const PIVOT: f64 = 1e-12;

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `d - 1` unit vectors spanning `k^⊥`.
pub fn basis_vectors(k: &[i64]) -> Result<Vec<Vec<f64>>> {
    let d = k.len();
    if d < 2 {
        return Err(invalid("frames need dimension at least 2"));
    }
    if norm_sq(k) == 0 {
        return Err(invalid("frame requested for the zero vector"));
    }
    let rep: Vec<f64> = if is_lex_positive(k) {
        k.iter().map(|&c| c as f64).collect()
    } else {
        k.iter().map(|&c| -(c as f64)).collect()
    };
    let len = dotf(&rep, &rep).sqrt();
    let mut accepted: Vec<Vec<f64>> = vec![rep.iter().map(|c| c / len).collect()];
    for j in 0..d {
        if accepted.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        // Two Gram–Schmidt passes keep the result orthogonal to rounding.
        for _ in 0..2 {
            for u in &accepted {
                let c = dotf(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let n = dotf(&v, &v).sqrt();
        if n > DEPENDENT {
            for x in v.iter_mut() {
                *x /= n;
            }
            if v.iter().find(|x| x.abs() > PIVOT).is_some_and(|&x| x < 0.0) {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            accepted.push(v);
        }
    }
    accepted.remove(0);
    Ok(accepted)
}

/// Frames of the representative support vectors of `θ`, in lexicographic
/// order of the representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    dim: usize,
    reps: Vec<Vec<i64>>,
    vectors: Vec<f64>,
}

impl FrameSet {
    pub fn for_theta(theta: &ThetaCoefficients) -> Result<Self> {
        let dim = theta.dim();
        let mut reps = Vec::new();
        let mut vectors = Vec::new();
        for e in theta.representatives() {
            for a in basis_vectors(&e.k)? {
                vectors.extend_from_slice(&a);
            }
            reps.push(e.k.clone());
        }
        Ok(Self { dim, reps, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representatives(&self) -> &[Vec<i64>] {
        &self.reps
    }

    /// `a_{l,i}` for the `r`-th representative `l`.
    pub fn vector(&self, r: usize, i: usize) -> &[f64] {
        let start = (r * (self.dim - 1) + i) * self.dim;
        &self.vectors[start..start + self.dim]
    }

    /// Index of the representative of `±l`, and whether `l` is the negative.
    pub fn locate(&self, l: &[i64]) -> Option<(usize, bool)> {
        if is_lex_positive(l) {
            self.reps.binary_search_by(|r| r.as_slice().cmp(l)).ok().map(|r| (r, false))
        } else {
            let neg: Vec<i64> = l.iter().map(|c| -c).collect();
            self.reps.binary_search_by(|r| r.as_slice().cmp(neg.as_slice())).ok().map(|r| (r, true))
        }
    }
}
