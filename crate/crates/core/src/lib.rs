//! Certified randomness from EPR-steering inequality violations.
//!
//! The crate is organised in three layers:
//!
//! - [`qmat`]: dense complex linear algebra (kets, operators, partial trace,
//!   Hermitian eigendecomposition, biorthogonal dual bases).
//! - [`steering`]: the steering scenario itself. Assemblages, steering
//!   functionals and their classical (LHS) bounds, the unique-ensemble solver
//!   for two linearly independent sets, and the qudit constructions built from
//!   a Schmidt state and Fourier-conjugate measurements.
//! - [`certify`]: the adversarial guessing-probability semidefinite program,
//!   a block interior-point solver for it, min-entropy certificates, and
//!   parallel sweeps over the observed violation.

pub mod certify;
pub mod qmat;
pub mod steering;

pub use num_complex::Complex64;
