//! Euler–Maruyama Monte Carlo for the Fourier modes of the transport and
//! stochastic heat equations on a truncated lattice.
//!
//! Only lexicographically positive modes are evolved; `û_{-k}` is always
//! the conjugate of `û_k`. Each path owns a ChaCha8 stream selected by
//! `(base_seed, path_index)`.

mod ensemble;
mod interval;
mod noise;
mod system;

pub use ensemble::{
    aggregate, path_rng, simulate_ensemble, simulate_path, EnsembleStats, McConfig, Moments, PathRecord,
};
pub use interval::{interval_sup_stats, IntervalReport};
pub use noise::{increment_moments, noise_increments, IncrementMoments, NoiseDraw};
pub use system::{realness_defect, scheme_moment_recursion, DiagonalFactors, ModeState, ModeSystem};
