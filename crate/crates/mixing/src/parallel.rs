//! Order-preserving parallel evaluation of independent paths.

use rayon::prelude::*;

/// Evaluates `f(0..n)` in parallel and returns the results in index order,
/// so any later reduction is sequential and bit-reproducible.
pub fn map_paths<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync,
{
    (0..n as u64).into_par_iter().map(&f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = map_paths::<_, (), _>(1000, |i| Ok(i * i)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == (i * i) as u64));
        assert!(map_paths(10, |i| if i == 7 { Err(i) } else { Ok(i) }).is_err());
    }
}
