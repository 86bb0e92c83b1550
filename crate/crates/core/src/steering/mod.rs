//! The steering scenario: assemblages, steering functionals, their classical
//! bounds, and the qudit constructions that reach the maximal violation.
//!
//! Indexed families are stored input-major: `elements[x][a]` is the element
//! for outcome `a` of input `x`.

mod assemblage;
mod construct;
mod ensemble;
mod functional;
mod json;
mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmat::QmatError;

pub use assemblage::{assemblage_from, Assemblage, MeasurementSet, NO_SIGNALLING_TOL};
pub use construct::{
    canonical_measurements, chi_states, fourier, result2_functional, schmidt_state, SchmidtSpec,
    DEFAULT_SCHMIDT_FLOOR,
};
pub use ensemble::{
    analytic_pguess_at_max, unique_distributions, EnsembleOptions, UniqueDistributions,
};
pub use functional::{lhs_bound, lhs_optimum, steering_value, LhsOptimum, SteeringFunctional};
pub use json::{FamilyJson, ScenarioJson};
pub use sample::{
    random_co_decomposable, random_ket, random_schmidt, random_unitary, random_weights, CoDecomposablePair,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteeringError {
    #[error(transparent)]
    Qmat(#[from] QmatError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("invalid Schmidt coefficients: {0}")]
    InvalidSchmidt(String),
    #[error("state is not full Schmidt rank: coefficient {index} is {value:e} (< {floor:e})")]
    NotFullRank { index: usize, value: f64, floor: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("LHS enumeration too large: {strategies} deterministic strategies")]
    EnumerationTooLarge { strategies: f64 },
    #[error("vanishing expansion coefficient |{value:e}| < {floor:e}")]
    VanishingCoefficient { value: f64, floor: f64 },
    #[error("unique solution has a negative entry ({min_entry:e})")]
    NoNonnegativeSolution { min_entry: f64 },
    #[error("the two sets do not decompose a common operator (residual {residual:e})")]
    NoCommonDecomposition { residual: f64 },
    #[error("closed-form and linear-solve distributions disagree by {discrepancy:e}")]
    OracleDisagreement { discrepancy: f64 },
    #[error("functional is not a two-input rank-1 functional")]
    NotRankOne,
    #[error("input index {x} out of range for {n} inputs")]
    InputOutOfRange { x: usize, n: usize },
}

pub type Result<T> = std::result::Result<T, SteeringError>;

/// Number of inputs, outcomes, and the dimension of the trusted system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_inputs: usize,
    pub n_outcomes: usize,
    pub dim_b: usize,
}

impl Scenario {
    pub fn new(n_inputs: usize, n_outcomes: usize, dim_b: usize) -> Result<Self> {
        if n_inputs == 0 || n_outcomes == 0 || dim_b == 0 {
            return Err(SteeringError::InvalidScenario(format!(
                "n={n_inputs}, d={n_outcomes}, dimB={dim_b}: all must be positive"
            )));
        }
        Ok(Self {
            n_inputs,
            n_outcomes,
            dim_b,
        })
    }

    /// Two inputs, `d` outcomes, trusted system ℂ^d.
    pub fn qudit(d: usize) -> Self {
        assert!(d > 0);
        Self {
            n_inputs: 2,
            n_outcomes: d,
            dim_b: d,
        }
    }

    pub fn check_input(&self, x: usize) -> Result<()> {
        if x >= self.n_inputs {
            return Err(SteeringError::InputOutOfRange {
                x,
                n: self.n_inputs,
            });
        }
        Ok(())
    }
}

fn check_shape(scenario: &Scenario, elements: &[Vec<crate::qmat::Operator>], dim: usize) -> Result<()> {
    if elements.len() != scenario.n_inputs {
        return Err(SteeringError::ScenarioMismatch(format!(
            "{} input slices for n={}",
            elements.len(),
            scenario.n_inputs
        )));
    }
    for (x, slice) in elements.iter().enumerate() {
        if slice.len() != scenario.n_outcomes {
            return Err(SteeringError::ScenarioMismatch(format!(
                "input {x} has {} outcomes, expected {}",
                slice.len(),
                scenario.n_outcomes
            )));
        }
        if let Some(op) = slice.iter().find(|op| op.dim() != dim) {
            return Err(SteeringError::ScenarioMismatch(format!(
                "element of dimension {} in input {x}, expected {dim}",
                op.dim()
            )));
        }
    }
    Ok(())
}
