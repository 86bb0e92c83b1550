//! Schmidt states, Fourier-conjugate measurements, and the χ-state functional
//! that a full-Schmidt-rank state violates maximally.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::qmat::{Ket, Operator};

use super::{MeasurementSet, Result, Scenario, SteeringError, SteeringFunctional};

/// Smallest Schmidt coefficient accepted as nonzero.
pub const DEFAULT_SCHMIDT_FLOOR: f64 = 1e-6;
const SUM_TOL: f64 = 1e-12;

/// Schmidt coefficients λ_i of Σ_i √λ_i |i⟩|i⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpec {
    lambdas: Vec<f64>,
    floor: f64,
}

impl SchmidtSpec {
    /// Coefficients must be finite, non-negative and sum to one. Zero entries
    /// are accepted here and rejected by the constructions that need full
    /// Schmidt rank.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(SteeringError::InvalidSchmidt("no coefficients".into()));
        }
        if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(SteeringError::InvalidSchmidt(format!(
                "coefficient {bad} is negative or not finite"
            )));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(SteeringError::InvalidSchmidt(format!("coefficients sum to {sum}")));
        }
        Ok(Self {
            lambdas,
            floor: DEFAULT_SCHMIDT_FLOOR,
        })
    }

    /// (1/d, …, 1/d)
    pub fn maximal(d: usize) -> Self {
        assert!(d > 0);
        Self {
            lambdas: vec![1.0 / d as f64; d],
            floor: DEFAULT_SCHMIDT_FLOOR,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    pub fn check_full_rank(&self) -> Result<()> {
        match self.lambdas.iter().position(|&l| l < self.floor) {
            Some(index) => Err(SteeringError::NotFullRank {
                index,
                value: self.lambdas[index],
                floor: self.floor,
            }),
            None => Ok(()),
        }
    }
}

/// Σ_i √λ_i |i⟩|i⟩ in ℂ^d ⊗ ℂ^d.
pub fn schmidt_state(spec: &SchmidtSpec) -> Result<Ket> {
    spec.check_full_rank()?;
    let d = spec.dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for (i, l) in spec.lambdas().iter().enumerate() {
        amps[i * d + i] = Complex64::new(l.sqrt(), 0.0);
    }
    Ok(Ket::new(amps)?)
}

/// Discrete Fourier transform, entry (j, k) = exp(2πi·jk/d)/√d.
pub fn fourier(d: usize) -> Operator {
    let norm = 1.0 / (d as f64).sqrt();
    Operator::from_fn(d, |j, k| {
        // reduce jk mod d before scaling to keep the phase accurate for large d
        let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
        Complex64::from_polar(norm, phase)
    })
}

/// Computational-basis measurement (x = 0) and its Fourier conjugate (x = 1).
pub fn canonical_measurements(d: usize) -> Result<MeasurementSet> {
    if d < 2 {
        return Err(SteeringError::InvalidScenario(format!("need d >= 2, got {d}")));
    }
    let f = fourier(d);
    let computational = (0..d).map(|a| Ket::basis(d, a).projector()).collect();
    let conjugate = (0..d)
        .map(|a| f.apply(&Ket::basis(d, a)).projector().hermitian_part())
        .collect();
    MeasurementSet::new(Scenario::qudit(d), vec![computational, conjugate])
}

/// Unit kets |χ_a⟩ ∝ Σ_i √λ_i ⟨a|F†|i⟩ |i⟩.
///
/// The unnormalized sum has squared norm 1/d, so the returned kets carry an
/// overall factor √d.
pub fn chi_states(spec: &SchmidtSpec) -> Result<Vec<Ket>> {
    spec.check_full_rank()?;
    let d = spec.dim();
    let f = fourier(d);
    (0..d)
        .map(|a| {
            let amps = (0..d)
                .map(|i| f.get(i, a).conj() * spec.lambdas()[i].sqrt())
                .collect();
            Ok(Ket::new(amps)?.normalized())
        })
        .collect()
}

/// F_{a|0} = |a⟩⟨a|, F_{a|1} = |χ_a⟩⟨χ_a|.
pub fn result2_functional(spec: &SchmidtSpec) -> Result<SteeringFunctional> {
    let d = spec.dim();
    let computational = (0..d).map(|a| Ket::basis(d, a)).collect();
    SteeringFunctional::from_kets(vec![computational, chi_states(spec)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::{assemblage_from, steering_value};

    fn close(a: &Ket, b: &Ket, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn schmidt_state_layout() {
        let s = 0.5f64.sqrt();
        let psi = schmidt_state(&SchmidtSpec::maximal(2)).unwrap();
        assert!(close(&psi, &Ket::from_real(&[s, 0.0, 0.0, s]).unwrap(), 1e-15));

        let psi = schmidt_state(&SchmidtSpec::new(vec![0.5, 0.3, 0.2]).unwrap()).unwrap();
        let want = [0.5f64.sqrt(), 0., 0., 0., 0.3f64.sqrt(), 0., 0., 0., 0.2f64.sqrt()];
        assert!(close(&psi, &Ket::from_real(&want).unwrap(), 1e-15));
        assert!(psi.is_unit());
    }

    #[test]
    fn rank_deficient_schmidt_is_rejected() {
        let spec = SchmidtSpec::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            schmidt_state(&spec),
            Err(SteeringError::NotFullRank { index: 1, .. })
        ));
        assert!(chi_states(&spec).is_err());
        assert!(result2_functional(&spec).is_err());
    }

    #[test]
    fn schmidt_spec_validation() {
        assert!(SchmidtSpec::new(vec![0.5, 0.6]).is_err());
        assert!(SchmidtSpec::new(vec![1.5, -0.5]).is_err());
        assert!(SchmidtSpec::new(vec![]).is_err());
        assert!(SchmidtSpec::new(vec![0.5, 0.3, 0.2]).is_ok());
    }

    #[test]
    fn fourier_properties() {
        let s = 1.0 / 2f64.sqrt();
        let h = Operator::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        assert!(fourier(2).max_abs_diff(&h) < 1e-15);
        for d in [1, 2, 3, 4, 7, 16] {
            let f = fourier(d);
            assert!(f.mul(&f.adjoint()).max_abs_diff(&Operator::identity(d)) < 1e-12);
            assert!(f.is_unitary());
            for i in 0..d {
                for a in 0..d {
                    assert!((f.get(i, a).norm_sqr() - 1.0 / d as f64).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn canonical_measurements_d2() {
        let m = canonical_measurements(2).unwrap();
        assert_eq!(m.element(0, 0), &Operator::diagonal(&[1.0, 0.0]));
        assert_eq!(m.element(1, 0), &Operator::diagonal(&[0.0, 1.0]));
        let plus = Operator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let minus = Operator::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(m.element(0, 1).max_abs_diff(&plus) < 1e-15);
        assert!(m.element(1, 1).max_abs_diff(&minus) < 1e-15);
        assert!(canonical_measurements(1).is_err());
    }

    #[test]
    fn conjugate_measurement_is_complete() {
        for d in 2..9 {
            let m = canonical_measurements(d).unwrap();
            let total = (1..d).fold(m.element(0, 1).clone(), |acc, a| acc.add(m.element(a, 1)));
            assert!(total.max_abs_diff(&Operator::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn chi_states_qubit_examples() {
        let s = 0.5f64.sqrt();
        let chi = chi_states(&SchmidtSpec::maximal(2)).unwrap();
        assert!(chi[0].same_ray(&Ket::from_real(&[s, s]).unwrap(), 1e-12));
        assert!(chi[1].same_ray(&Ket::from_real(&[s, -s]).unwrap(), 1e-12));

        let chi = chi_states(&SchmidtSpec::new(vec![0.6, 0.4]).unwrap()).unwrap();
        let (p, q) = (0.6f64.sqrt(), 0.4f64.sqrt());
        assert!(chi[0].same_ray(&Ket::from_real(&[p, q]).unwrap(), 1e-12));
        assert!(chi[1].same_ray(&Ket::from_real(&[p, -q]).unwrap(), 1e-12));
        assert!(chi.iter().all(Ket::is_unit));
    }

    #[test]
    fn chi_ensemble_reproduces_reduced_state() {
        for lambdas in [vec![0.6, 0.4], vec![0.5, 0.3, 0.2], vec![0.1, 0.2, 0.3, 0.4]] {
            let spec = SchmidtSpec::new(lambdas.clone()).unwrap();
            let d = spec.dim();
            let chi = chi_states(&spec).unwrap();
            let mixture = chi
                .iter()
                .map(|k| k.projector().scale(1.0 / d as f64))
                .reduce(|a, b| a.add(&b))
                .unwrap();
            assert!(mixture.max_abs_diff(&Operator::diagonal(&lambdas)) < 1e-10);
        }
    }

    #[test]
    fn result2_functional_qubit() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        assert_eq!(f.element(0, 0), &Operator::diagonal(&[1.0, 0.0]));
        let plus = Operator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(f.element(0, 1).max_abs_diff(&plus) < 1e-12);
        assert!(f.basis_kets().is_some());
    }

    #[test]
    fn chi_functional_reaches_two() {
        let spec = SchmidtSpec::new(vec![0.5, 0.3, 0.2]).unwrap();
        let asm = assemblage_from(&schmidt_state(&spec).unwrap(), &canonical_measurements(3).unwrap()).unwrap();
        let beta = steering_value(&result2_functional(&spec).unwrap(), &asm).unwrap();
        assert!((beta - 2.0).abs() < 1e-10);
    }
}
