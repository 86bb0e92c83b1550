//! Parsing of user input into core types.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use steercert_core::certify::{BetaConstraint, CertifyError, CertifyOptions, SolverOptions};
use steercert_core::steering::{result2_functional, FamilyJson, SchmidtSpec, SteeringFunctional};

use crate::args::{ConstraintArg, SolveArgs, StateArgs};
use crate::Failure;

const RENORMALIZE_TOL: f64 = 1e-6;

/// "maximal" or comma-separated coefficients. Lists summing to within 1e-6
/// of one are rescaled; anything further off is rejected.
pub fn parse_schmidt(text: &str, d: usize) -> Result<SchmidtSpec, Failure> {
    if text.trim().eq_ignore_ascii_case("maximal") {
        if d < 2 {
            return Err(Failure::Invalid(format!("need d >= 2, got {d}")));
        }
        return Ok(SchmidtSpec::maximal(d));
    }
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Invalid(format!("not a number in --schmidt: {t:?}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != d {
        return Err(Failure::Invalid(format!(
            "--schmidt has {} entries but --d is {d}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Failure::Invalid("Schmidt coefficients must be non-negative".into()));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Failure::Invalid(format!("Schmidt coefficients sum to {sum}, not 1")));
    }
    let mut lambdas: Vec<f64> = values.iter().map(|v| v / sum).collect();
    let drift = 1.0 - lambdas.iter().sum::<f64>();
    let top = (0..d).max_by(|&i, &j| lambdas[i].total_cmp(&lambdas[j])).unwrap_or(0);
    lambdas[top] += drift;
    let spec = SchmidtSpec::new(lambdas).map_err(|e| Failure::Invalid(e.to_string()))?;
    spec.check_full_rank().map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(spec)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// The functional from `--functional`, or the χ-state functional of the
/// Schmidt state.
pub fn functional(state: &StateArgs) -> Result<SteeringFunctional, Failure> {
    match &state.functional {
        Some(path) => {
            let raw: FamilyJson = read_json(path)?;
            SteeringFunctional::try_from(&raw).map_err(|e| Failure::Invalid(e.to_string()))
        }
        None => {
            let spec = parse_schmidt(&state.schmidt, state.d)?;
            result2_functional(&spec).map_err(|e| Failure::Invalid(e.to_string()))
        }
    }
}

pub fn certify_options(solve: &SolveArgs) -> Result<CertifyOptions, Failure> {
    for (name, v) in [("--tol-gap", solve.tol_gap), ("--tol-feas", solve.tol_feas)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::Invalid(format!("{name} must be positive")));
        }
    }
    Ok(CertifyOptions {
        solver: SolverOptions {
            gap_tol: solve.tol_gap,
            feas_tol: solve.tol_feas,
            ..SolverOptions::default()
        },
        constraint: match solve.constraint {
            ConstraintArg::Eq => BetaConstraint::Equality,
            ConstraintArg::Geq => BetaConstraint::AtLeast,
        },
        ..CertifyOptions::default()
    })
}

pub fn certify_failure(e: CertifyError) -> Failure {
    match e {
        CertifyError::Infeasible(_) | CertifyError::Unbounded(_) | CertifyError::NumericalFailure(_) => {
            Failure::Solver(e.to_string())
        }
        _ => Failure::Invalid(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_expands() {
        let s = parse_schmidt("maximal", 3).unwrap();
        assert_eq!(s.lambdas(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn truncated_decimals_are_renormalized() {
        let s = parse_schmidt("0.3333333,0.3333333,0.3333333", 3).unwrap();
        assert!((s.lambdas().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.lambdas().iter().all(|l| (l - 1.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn bad_lists_are_rejected() {
        for (text, d) in [("0.5,0.4", 2), ("1,0", 2), ("0.5,0.5", 3), ("a,b", 2), ("1.2,-0.2", 2)] {
            assert!(matches!(parse_schmidt(text, d), Err(Failure::Invalid(_))), "{text}");
        }
    }
}
