use crate::qmat::{dual_basis, eig_hermitian, Ket, Operator, DEFAULT_RANK_TOL};

use super::{check_shape, Assemblage, Result, Scenario, SteeringError};

const RANK_ONE_TOL: f64 = 1e-10;
const MAX_STRATEGIES: f64 = 1e6;

/// Hermitian witnesses F_{a|x}, optionally known to be rank-1 projectors
/// |φ_{a|x}⟩⟨φ_{a|x}|.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringFunctional {
    scenario: Scenario,
    elements: Vec<Vec<Operator>>,
    basis_kets: Option<Vec<Vec<Ket>>>,
}

impl SteeringFunctional {
    /// General Hermitian functional. When every element is a rank-1
    /// projector and every input slice is linearly independent, the
    /// projecting kets are recovered and stored.
    pub fn new(scenario: Scenario, elements: Vec<Vec<Operator>>) -> Result<Self> {
        check_shape(&scenario, &elements, scenario.dim_b)?;
        for (x, slice) in elements.iter().enumerate() {
            for (a, f) in slice.iter().enumerate() {
                let dev = f.hermiticity_error();
                if dev > crate::qmat::HERMITIAN_TOL {
                    return Err(SteeringError::InvariantViolated(format!(
                        "F_{{{a}|{x}}} is not Hermitian (deviation {dev:.3e})"
                    )));
                }
            }
        }
        let basis_kets = recover_rank_one(&elements);
        Ok(Self {
            scenario,
            elements,
            basis_kets,
        })
    }

    /// Rank-1 functional F_{a|x} = |φ_{a|x}⟩⟨φ_{a|x}| from `kets[x][a]`.
    /// Kets are normalized; each input slice must be linearly independent.
    pub fn from_kets(kets: Vec<Vec<Ket>>) -> Result<Self> {
        let n = kets.len();
        let d = kets.first().map(Vec::len).unwrap_or(0);
        let dim = kets
            .first()
            .and_then(|s| s.first())
            .map(Ket::dim)
            .unwrap_or(0);
        let scenario = Scenario::new(n, d, dim)?;
        let kets: Vec<Vec<Ket>> = kets
            .into_iter()
            .map(|s| s.iter().map(Ket::normalized).collect())
            .collect();
        for slice in &kets {
            if slice.len() != d {
                return Err(SteeringError::ScenarioMismatch("ragged ket family".into()));
            }
            dual_basis(slice, DEFAULT_RANK_TOL)?;
        }
        let elements: Vec<Vec<Operator>> = kets
            .iter()
            .map(|s| s.iter().map(|k| k.projector().hermitian_part()).collect())
            .collect();
        check_shape(&scenario, &elements, dim)?;
        Ok(Self {
            scenario,
            elements,
            basis_kets: Some(kets),
        })
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

    /// `basis_kets()[x][a]` is |φ_{a|x}⟩ for rank-1 functionals.
    pub fn basis_kets(&self) -> Option<&[Vec<Ket>]> {
        self.basis_kets.as_deref()
    }
}

fn recover_rank_one(elements: &[Vec<Operator>]) -> Option<Vec<Vec<Ket>>> {
    let mut kets = Vec::with_capacity(elements.len());
    for slice in elements {
        let mut row = Vec::with_capacity(slice.len());
        for f in slice {
            let eig = eig_hermitian(f).ok()?;
            let top = eig.eigenvectors.last()?.clone();
            if f.max_abs_diff(&top.projector()) > RANK_ONE_TOL {
                return None;
            }
            row.push(top);
        }
        dual_basis(&row, DEFAULT_RANK_TOL).ok()?;
        kets.push(row);
    }
    Some(kets)
}

/// β = Σ_{a,x} tr(F_{a|x} σ_{a|x}).
pub fn steering_value(functional: &SteeringFunctional, assemblage: &Assemblage) -> Result<f64> {
    if functional.scenario() != assemblage.scenario() {
        return Err(SteeringError::ScenarioMismatch(format!(
            "functional {:?} vs assemblage {:?}",
            functional.scenario(),
            assemblage.scenario()
        )));
    }
    let mut beta = 0.0;
    for (fs, ss) in functional.elements().iter().zip(assemblage.elements()) {
        for (f, s) in fs.iter().zip(ss) {
            beta += f.trace_product(s).re;
        }
    }
    Ok(beta)
}

/// Best deterministic local-hidden-state strategy for a functional.
#[derive(Debug, Clone)]
pub struct LhsOptimum {
    pub value: f64,
    /// `strategy[x]` is the outcome announced for input x.
    pub strategy: Vec<usize>,
    /// Top eigenvector of Σ_x F_{strategy[x]|x}.
    pub state: Ket,
}

/// β^LHS, maximised over deterministic assignments x ↦ a(x) of the top
/// eigenvalue of Σ_x F_{a(x)|x}. Mixtures of deterministic strategies cannot
/// exceed the best one since β is linear.
pub fn lhs_bound(functional: &SteeringFunctional) -> Result<f64> {
    lhs_optimum(functional).map(|o| o.value)
}

pub fn lhs_optimum(functional: &SteeringFunctional) -> Result<LhsOptimum> {
    let Scenario {
        n_inputs: n,
        n_outcomes: d,
        ..
    } = *functional.scenario();
    let strategies = (d as f64).powi(n as i32);
    if strategies > MAX_STRATEGIES {
        return Err(SteeringError::EnumerationTooLarge { strategies });
    }
    let mut strategy = vec![0usize; n];
    let mut best: Option<LhsOptimum> = None;
    loop {
        let sum = strategy
            .iter()
            .enumerate()
            .skip(1)
            .fold(functional.element(strategy[0], 0).clone(), |acc, (x, &a)| {
                acc.add(functional.element(a, x))
            });
        let eig = eig_hermitian(&sum.hermitian_part())?;
        let top = *eig.eigenvalues.last().expect("nonempty spectrum");
        if best.as_ref().is_none_or(|b| top > b.value) {
            best = Some(LhsOptimum {
                value: top,
                strategy: strategy.clone(),
                state: eig.eigenvectors.last().cloned().expect("nonempty spectrum"),
            });
        }
        // mixed-radix increment over x ↦ a(x)
        let mut x = 0;
        loop {
            if x == n {
                return Ok(best.expect("at least one strategy"));
            }
            strategy[x] += 1;
            if strategy[x] < d {
                break;
            }
            strategy[x] = 0;
            x += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::{
        assemblage_from, canonical_measurements, result2_functional, schmidt_state, SchmidtSpec,
    };

    #[test]
    fn lhs_bound_qubit_maximal() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        assert!((lhs_bound(&f).unwrap() - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn lhs_bound_aligned_bases_saturates() {
        let basis: Vec<Ket> = (0..3).map(|a| Ket::basis(3, a)).collect();
        let f = SteeringFunctional::from_kets(vec![basis.clone(), basis]).unwrap();
        assert!((lhs_bound(&f).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lhs_bound_rank_one_pair_formula() {
        let spec = SchmidtSpec::new(vec![0.5, 0.3, 0.2]).unwrap();
        let f = result2_functional(&spec).unwrap();
        let kets = f.basis_kets().unwrap();
        let mut best: f64 = 0.0;
        for u in &kets[0] {
            for v in &kets[1] {
                best = best.max(u.inner(v).norm());
            }
        }
        let lhs = lhs_bound(&f).unwrap();
        assert!((lhs - (1.0 + best)).abs() < 1e-12);
        assert!((lhs - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn lhs_guard() {
        let basis: Vec<Ket> = (0..40).map(|a| Ket::basis(40, a)).collect();
        let f = SteeringFunctional::from_kets(vec![basis; 4]).unwrap();
        assert!(matches!(lhs_bound(&f), Err(SteeringError::EnumerationTooLarge { .. })));
    }

    #[test]
    fn zero_functional_gives_zero() {
        let spec = SchmidtSpec::maximal(2);
        let asm = assemblage_from(&schmidt_state(&spec).unwrap(), &canonical_measurements(2).unwrap()).unwrap();
        let zero = SteeringFunctional::new(
            Scenario::qudit(2),
            vec![vec![Operator::zeros(2); 2]; 2],
        )
        .unwrap();
        assert!(zero.basis_kets().is_none());
        assert_eq!(steering_value(&zero, &asm).unwrap(), 0.0);
    }

    #[test]
    fn unsteerable_product_state_value() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        let psi = Ket::basis(2, 0).kron(&Ket::basis(2, 0));
        let asm = assemblage_from(&psi, &canonical_measurements(2).unwrap()).unwrap();
        assert!((steering_value(&f, &asm).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn scenario_mismatch() {
        let f = result2_functional(&SchmidtSpec::maximal(3)).unwrap();
        let spec = SchmidtSpec::maximal(2);
        let asm = assemblage_from(&schmidt_state(&spec).unwrap(), &canonical_measurements(2).unwrap()).unwrap();
        assert!(matches!(steering_value(&f, &asm), Err(SteeringError::ScenarioMismatch(_))));
    }

    #[test]
    fn rank_one_kets_are_recovered_from_projectors() {
        let f = result2_functional(&SchmidtSpec::new(vec![0.7, 0.2, 0.1]).unwrap()).unwrap();
        let g = SteeringFunctional::new(*f.scenario(), f.elements().to_vec()).unwrap();
        let (fk, gk) = (f.basis_kets().unwrap(), g.basis_kets().unwrap());
        for x in 0..2 {
            for a in 0..3 {
                assert!(fk[x][a].same_ray(&gk[x][a], 1e-9));
            }
        }
    }

    #[test]
    fn non_hermitian_element_rejected() {
        let bad = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let elements = vec![vec![bad, Operator::zeros(2)], vec![Operator::zeros(2); 2]];
        assert!(SteeringFunctional::new(Scenario::qudit(2), elements).is_err());
    }
}
