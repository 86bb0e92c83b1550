use crate::qmat::{kron, partial_trace_a, Ket, Operator, QmatError};

use super::{check_shape, Result, Scenario, SteeringError};

/// Tolerance on no-signalling and normalization of an assemblage.
pub const NO_SIGNALLING_TOL: f64 = 1e-9;
const COMPLETENESS_TOL: f64 = 1e-10;

/// Measurement operators M_{a|x} on the untrusted side.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    scenario: Scenario,
    elements: Vec<Vec<Operator>>,
}

impl MeasurementSet {
    /// Validates completeness and positivity of every input.
    pub fn new(scenario: Scenario, elements: Vec<Vec<Operator>>) -> Result<Self> {
        let dim = elements
            .first()
            .and_then(|s| s.first())
            .map(Operator::dim)
            .ok_or_else(|| SteeringError::InvalidScenario("empty measurement set".into()))?;
        check_shape(&scenario, &elements, dim)?;
        for (x, slice) in elements.iter().enumerate() {
            for (a, m) in slice.iter().enumerate() {
                if !m.is_psd() {
                    return Err(SteeringError::InvariantViolated(format!(
                        "M_{{{a}|{x}}} is not positive semidefinite"
                    )));
                }
            }
            let total = slice
                .iter()
                .skip(1)
                .fold(slice[0].clone(), |acc, m| acc.add(m));
            let err = total.max_abs_diff(&Operator::identity(dim));
            if err > COMPLETENESS_TOL {
                return Err(SteeringError::InvariantViolated(format!(
                    "measurement {x} is incomplete (deviation {err:.3e})"
                )));
            }
        }
        Ok(Self { scenario, elements })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Dimension of the measured system.
    pub fn dim(&self) -> usize {
        self.elements[0][0].dim()
    }

    pub fn element(&self, a: usize, x: usize) -> &Operator {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[Vec<Operator>] {
        &self.elements
    }
}

/// Subnormalized conditional states σ_{a|x} of the trusted system.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    scenario: Scenario,
    elements: Vec<Vec<Operator>>,
}

impl Assemblage {
    /// Validates positivity, no-signalling and unit total trace.
    pub fn new(scenario: Scenario, elements: Vec<Vec<Operator>>) -> Result<Self> {
        check_shape(&scenario, &elements, scenario.dim_b)?;
        let out = Self { scenario, elements };
        for (x, slice) in out.elements.iter().enumerate() {
            for (a, s) in slice.iter().enumerate() {
                if !s.is_psd() {
                    return Err(SteeringError::InvariantViolated(format!(
                        "σ_{{{a}|{x}}} is not positive semidefinite"
                    )));
                }
            }
        }
        let ns = out.no_signalling_error();
        if ns > NO_SIGNALLING_TOL {
            return Err(SteeringError::InvariantViolated(format!(
                "assemblage signals (deviation {ns:.3e})"
            )));
        }
        let norm = out.normalization_error();
        if norm > NO_SIGNALLING_TOL {
            return Err(SteeringError::InvariantViolated(format!(
                "assemblage trace deviates from 1 by {norm:.3e}"
            )));
        }
        Ok(out)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn element(&self, a: usize, x: usize) -> &Operator {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[Vec<Operator>] {
        &self.elements
    }

    /// Σ_a σ_{a|x}
    pub fn reduced_state(&self, x: usize) -> Operator {
        let slice = &self.elements[x];
        slice.iter().skip(1).fold(slice[0].clone(), |acc, s| acc.add(s))
    }

    pub fn no_signalling_error(&self) -> f64 {
        let reference = self.reduced_state(0);
        (1..self.scenario.n_inputs)
            .map(|x| self.reduced_state(x).max_abs_diff(&reference))
            .fold(0.0, f64::max)
    }

    pub fn normalization_error(&self) -> f64 {
        (self.reduced_state(0).trace().re - 1.0).abs()
    }

    /// p(a|x) = tr σ_{a|x}
    pub fn probability(&self, a: usize, x: usize) -> f64 {
        self.elements[x][a].trace().re
    }

    /// ρ_{a|x} = σ_{a|x} / p(a|x), or `None` when the outcome never occurs.
    pub fn conditional_state(&self, a: usize, x: usize) -> Option<Operator> {
        let p = self.probability(a, x);
        (p > 0.0).then(|| self.elements[x][a].scale(1.0 / p))
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Assemblage, w: f64) -> Result<Assemblage> {
        if self.scenario != other.scenario {
            return Err(SteeringError::ScenarioMismatch("mixing different scenarios".into()));
        }
        let elements = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(s, o)| {
                s.iter()
                    .zip(o)
                    .map(|(p, q)| p.scale(w).add(&q.scale(1.0 - w)))
                    .collect()
            })
            .collect();
        Assemblage::new(self.scenario, elements)
    }
}

/// σ_{a|x} = tr_A[(M_{a|x} ⊗ 𝕀) |ψ⟩⟨ψ|] for a pure shared state.
pub fn assemblage_from(state: &Ket, meas: &MeasurementSet) -> Result<Assemblage> {
    let dim_a = meas.dim();
    if !state.dim().is_multiple_of(dim_a) {
        return Err(QmatError::DimensionMismatch {
            expected: dim_a * (state.dim() / dim_a).max(1),
            got: state.dim(),
        }
        .into());
    }
    if !state.is_unit() {
        return Err(SteeringError::InvariantViolated(format!(
            "shared state has squared norm {}",
            state.norm_squared()
        )));
    }
    let dim_b = state.dim() / dim_a;
    let rho = state.projector();
    let id_b = Operator::identity(dim_b);
    let elements = meas
        .elements()
        .iter()
        .map(|slice| {
            slice
                .iter()
                .map(|m| partial_trace_a(&kron(m, &id_b).mul(&rho), dim_a, dim_b).map(|s| s.hermitian_part()))
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let scenario = Scenario::new(meas.scenario().n_inputs, meas.scenario().n_outcomes, dim_b)?;
    Assemblage::new(scenario, elements)
}
