//! Desk-scale numerics and exact arithmetic for noncommutative geometry:
//! Clifford algebras and their wave operators, grid models of Schwartz
//! functions and oscillatory integrals, Fourier-coefficient models of
//! smooth (deformed) tori, finite-group and ℝⁿ crossed products,
//! pseudodifferential symbol calculus for ℝⁿ-actions, and fixed-point
//! counting for orbifold homology constants.
//!
//! Everything is pure and immutable after construction; all reductions
//! use fixed deterministic orders so repeated runs agree bit for bit.

pub mod clifford;
pub mod crossed;
pub mod grid;
pub mod group;
pub mod linalg;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod orbifold;
pub mod report;
pub mod symbol;
pub mod torus;
pub mod util;

pub use num_complex::Complex64;
