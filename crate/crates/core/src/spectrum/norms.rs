#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::lattice::LatticeBox;
use crate::FOUR_PI_SQ;

/// `‖Y‖_{ℓ^p}` and `Σ_k |2πk|^{2β} Y_k` for requested `p` and `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRecord {
    pub lp: Vec<(f64, f64)>,
    pub hbeta: Vec<(f64, f64)>,
}

/// `(Σ |Y_k|^p)^{1/p}`, summed in ascending id order.
pub fn lp_norm(y: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        y.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `Σ_k |2πk|^{2β} Y_k`.
pub fn hbeta_sum(lattice: &LatticeBox, y: &[f64], beta: f64) -> f64 {
    y.iter()
        .enumerate()
        .map(|(id, v)| {
            let s = FOUR_PI_SQ * lattice.norm_sq(id) as f64;
            let w = if beta == 1.0 {
                s
            } else if beta == -1.0 {
                1.0 / s
            } else {
                s.powf(beta)
            };
            w * v
        })
        .sum()
}

pub fn spectrum_norms(lattice: &LatticeBox, y: &[f64], p_list: &[f64], beta_list: &[f64]) -> NormRecord {
    NormRecord {
        lp: p_list.iter().map(|&p| (p, lp_norm(y, p))).collect(),
        hbeta: beta_list.iter().map(|&b| (b, hbeta_sum(lattice, y, b))).collect(),
    }
}
