use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Both sides of `Σ a_n^p ≤ (2p²/(p-1)) Σ (n+1)²(a_{n+1}^{p-1} - a_n^{p-1})(a_{n+1} - a_n)`.
///
/// The sequence is extended by zeros. Signed entries are accepted for `p = 2`.
pub fn poincare_gap(a: &[f64], p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must exceed 1, got {p}")));
    }
    let signed = p == 2.0;
    if let Some(x) = a.iter().find(|x| !x.is_finite() || (!signed && **x < 0.0)) {
        return Err(invalid(format!("entry {x} is not admissible for p = {p}")));
    }
    let pow = |x: f64, e: f64| if signed { x } else { x.powf(e) };
    let lhs: f64 = a.iter().map(|&x| if signed { x * x } else { x.powf(p) }).sum();
    let mut sum = 0.0;
    for n in 0..a.len() {
        let (x, y) = (a[n], a.get(n + 1).copied().unwrap_or(0.0));
        let w = (n as f64 + 1.0) * (n as f64 + 1.0);
        sum += w * (pow(y, p - 1.0) - pow(x, p - 1.0)) * (y - x);
    }
    Ok((lhs, 2.0 * p * p / (p - 1.0) * sum))
}
