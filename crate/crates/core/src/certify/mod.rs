//! Adversarial guessing probability for an observed steering violation.
//!
//! [`build_guessing_program`] writes the guessing problem as a block
//! semidefinite program over Eve-labelled assemblages σ^e_{a|x}; [`solve`]
//! is a primal-dual interior-point method for such programs; and
//! [`guessing_probability`] turns a solve into a [`GuessingCertificate`]
//! whose min-entropy is computed from a rigorous upper bound.

mod embed;
mod guessing;
mod output;
mod program;
mod solver;
mod sweep;

use thiserror::Error;

use crate::steering::SteeringError;

pub use embed::{embed_program, hermitian_to_real_embedding};
pub use guessing::{
    beta_range, build_guessing_program, guessing_probability, Attack, AttackAudit, BetaConstraint,
    CertifyOptions, GuessingCertificate, GuessingSetup,
};
pub use output::{
    format_g12, parse_csv, render_svg, write_csv, CertificateJson, CsvRow, SvgSeries, CSV_HEADER,
};
pub use program::{BlockSpec, ConicProgram, Equality, Field, LinearFunctional, SparseHermitian};
pub use solver::{solve, SolveError, Solution, SolverOptions, SolverReport, SolverStatus};
pub use sweep::{linspace, sweep, SweepPoint};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Steering(#[from] SteeringError),
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("BetaOutOfRange: beta_obs = {beta} outside [{min}, {max}]")]
    BetaOutOfRange { beta: f64, min: f64, max: f64 },
    #[error("guessing program is infeasible: {0}")]
    Infeasible(String),
    #[error("guessing program is unbounded: {0}")]
    Unbounded(String),
    #[error("solver failed: {0}")]
    NumericalFailure(String),
    #[error("beta grid must be sorted ascending (index {index})")]
    UnsortedGrid { index: usize },
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
