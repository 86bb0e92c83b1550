//! Block-diagonal semidefinite programs in equality form:
//!
//! ```text
//! maximize   Σ_j Re tr(C_j X_j)
//! subject to Σ_j Re tr(A_ij X_j) = b_i      for every equality i
//!            X_j ⪰ 0                       for every block j
//! ```
//!
//! Blocks are real symmetric (`T = f64`) or complex Hermitian
//! (`T = Complex64`). Coefficient matrices are stored sparsely with both
//! triangles present.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use super::CertifyError;

/// Scalar field of a program: real or complex double precision.
pub trait Field: ComplexField<RealField = f64> + Copy + Send + Sync {}

impl Field for f64 {}
impl Field for Complex64 {}

/// Sparse Hermitian coefficient matrix, entries `(row, col, value)`.
/// Repeated positions add up.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian<T> {
    dim: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Field> SparseHermitian<T> {
    pub fn new(dim: usize, entries: Vec<(usize, usize, T)>) -> Self {
        assert!(entries.iter().all(|&(r, c, _)| r < dim && c < dim));
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, (0..dim).map(|i| (i, i, T::one())).collect())
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DMatrix<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != T::zero() {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim: m.nrows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|&(_, _, v)| v == T::zero())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, v * T::from_real(factor)))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.add_into(&mut m, 1.0);
        m
    }

    /// `m += factor · self`
    pub fn add_into(&self, m: &mut DMatrix<T>, factor: f64) {
        let f = T::from_real(factor);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v * f;
        }
    }

    /// Re tr(self · x)
    pub fn trace_with(&self, x: &DMatrix<T>) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| (v * x[(c, r)]).real())
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.adjoint()).iter().map(|z| z.modulus()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_dense().norm()
    }
}

/// Σ_j Re tr(A_j X_j) over the listed blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional<T> {
    pub terms: Vec<(usize, SparseHermitian<T>)>,
}

impl<T: Field> LinearFunctional<T> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn with_term(mut self, block: usize, coeff: SparseHermitian<T>) -> Self {
        self.push(block, coeff);
        self
    }

    pub fn push(&mut self, block: usize, coeff: SparseHermitian<T>) {
        self.terms.push((block, coeff));
    }

    pub fn evaluate(&self, blocks: &[DMatrix<T>]) -> f64 {
        self.terms.iter().map(|(j, a)| a.trace_with(&blocks[*j])).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|(_, a)| a.is_empty())
    }
}

impl<T: Field> Default for LinearFunctional<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equality<T> {
    pub functional: LinearFunctional<T>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram<T> {
    pub blocks: Vec<BlockSpec>,
    pub objective: LinearFunctional<T>,
    pub equalities: Vec<Equality<T>>,
}

impl<T: Field> ConicProgram<T> {
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        Self {
            blocks,
            objective: LinearFunctional::new(),
            equalities: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, functional: LinearFunctional<T>, rhs: f64) {
        self.equalities.push(Equality { functional, rhs });
    }

    /// Every functional references declared blocks with matching side
    /// lengths and Hermitian coefficients; right-hand sides are finite.
    pub fn validate(&self) -> Result<(), CertifyError> {
        let check = |f: &LinearFunctional<T>, what: &str| -> Result<(), CertifyError> {
            for (j, a) in &f.terms {
                let block = self.blocks.get(*j).ok_or_else(|| {
                    CertifyError::MalformedProgram(format!("{what} references undeclared block {j}"))
                })?;
                if a.dim() != block.size {
                    return Err(CertifyError::MalformedProgram(format!(
                        "{what}: coefficient of side {} on block {j} of side {}",
                        a.dim(),
                        block.size
                    )));
                }
                if a.entries().iter().any(|&(_, _, v)| !v.modulus().is_finite()) {
                    return Err(CertifyError::MalformedProgram(format!("{what}: non-finite coefficient")));
                }
                let dev = a.hermiticity_error();
                if dev > 1e-12 * (1.0 + a.frobenius_norm()) {
                    return Err(CertifyError::MalformedProgram(format!(
                        "{what}: coefficient on block {j} is not Hermitian ({dev:.3e})"
                    )));
                }
            }
            Ok(())
        };
        if self.blocks.iter().any(|b| b.size == 0) {
            return Err(CertifyError::MalformedProgram("empty block".into()));
        }
        check(&self.objective, "objective")?;
        for (i, eq) in self.equalities.iter().enumerate() {
            check(&eq.functional, &format!("equality {i}"))?;
            if !eq.rhs.is_finite() {
                return Err(CertifyError::MalformedProgram(format!("equality {i}: non-finite rhs")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, blocks: &[DMatrix<T>]) -> f64 {
        self.objective.evaluate(blocks)
    }

    /// max_i |A_i(X) − b_i|
    pub fn equality_residual(&self, blocks: &[DMatrix<T>]) -> f64 {
        self.equalities
            .iter()
            .map(|eq| (eq.functional.evaluate(blocks) - eq.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Dual slack Σ_i y_i A_ij − C_j for every block.
    pub fn dual_slack(&self, y: &[f64]) -> Vec<DMatrix<T>> {
        let mut z: Vec<DMatrix<T>> = self
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.size, b.size))
            .collect();
        for (eq, &yi) in self.equalities.iter().zip(y) {
            for (j, a) in &eq.functional.terms {
                a.add_into(&mut z[*j], yi);
            }
        }
        for (j, c) in &self.objective.terms {
            c.add_into(&mut z[*j], -1.0);
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_with_matches_dense_product() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, -0.25),
                Complex64::new(0.5, 0.25),
                Complex64::new(-2.0, 0.0),
            ],
        );
        let x = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(3.0, 0.0),
                Complex64::new(0.1, 0.7),
                Complex64::new(0.1, -0.7),
                Complex64::new(1.0, 0.0),
            ],
        );
        let s = SparseHermitian::from_dense(&a);
        assert!((s.trace_with(&x) - (&a * &x).trace().re).abs() < 1e-14);
        assert_eq!(s.to_dense(), a);
    }

    #[test]
    fn validation_catches_bad_references() {
        let mut p = ConicProgram::<f64>::new(vec![BlockSpec { label: "b".into(), size: 2 }]);
        p.objective.push(1, SparseHermitian::identity(2));
        assert!(p.validate().is_err());

        let mut p = ConicProgram::<f64>::new(vec![BlockSpec { label: "b".into(), size: 2 }]);
        p.add_equality(LinearFunctional::new().with_term(0, SparseHermitian::new(2, vec![(0, 1, 1.0)])), 0.0);
        assert!(p.validate().is_err());

        let mut p = ConicProgram::<f64>::new(vec![BlockSpec { label: "b".into(), size: 2 }]);
        p.add_equality(LinearFunctional::new().with_term(0, SparseHermitian::identity(3)), 1.0);
        assert!(p.validate().is_err());
    }
}
