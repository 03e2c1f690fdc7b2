//! Alternating-step orbit covers of lattice planes and the discrete
//! Poincaré inequality that turns them into a lower bound for the lattice
//! Dirichlet form.

mod cover;
mod dirichlet;
mod plane;
mod poincare;

pub use cover::{cover_multiplicity, projection_bound_margin, projection_ratio, CoverReport};
pub use dirichlet::{dirichlet_ratio, dirichlet_ratio_bound, shell_pair_count, DirichletReport};
pub use plane::{build_orbits_2d, build_orbits_hd, Orbit, OrbitSystem, Plane, QuadrantDecomposition};
pub use poincare::poincare_gap;
