//! Real symmetric embedding of Hermitian programs.
//!
//! H ↦ [[Re H, −Im H], [Im H, Re H]] doubles every eigenvalue's
//! multiplicity, so it preserves positivity, and tr(E(A) E(X)) = 2 Re tr(AX).
//! Coefficients are halved so that embedded functionals take the same values.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::qmat::Operator;

use super::program::{BlockSpec, ConicProgram, Equality, LinearFunctional, SparseHermitian};

pub fn hermitian_to_real_embedding(h: &Operator) -> DMatrix<f64> {
    embed_dense(h.matrix())
}

pub(crate) fn embed_dense(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let d = m.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let v = m[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Inverse of [`embed_dense`] on matrices of the embedded form; reads the
/// averaged diagonal and off-diagonal blocks.
pub(crate) fn unembed_dense(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let d = m.nrows() / 2;
    DMatrix::from_fn(d, d, |r, c| {
        let re = 0.5 * (m[(r, c)] + m[(r + d, c + d)]);
        let im = 0.5 * (m[(r + d, c)] - m[(r, c + d)]);
        Complex64::new(re, im)
    })
}

fn embed_sparse(a: &SparseHermitian<Complex64>) -> SparseHermitian<f64> {
    let d = a.dim();
    let mut entries = Vec::with_capacity(4 * a.nnz());
    for &(r, c, v) in a.entries() {
        let (re, im) = (0.5 * v.re, 0.5 * v.im);
        if re != 0.0 {
            entries.push((r, c, re));
            entries.push((r + d, c + d, re));
        }
        if im != 0.0 {
            entries.push((r, c + d, -im));
            entries.push((r + d, c, im));
        }
    }
    SparseHermitian::new(2 * d, entries)
}

fn embed_functional(f: &LinearFunctional<Complex64>) -> LinearFunctional<f64> {
    LinearFunctional {
        terms: f.terms.iter().map(|(j, a)| (*j, embed_sparse(a))).collect(),
    }
}

/// Real program with the same optimal value as `program`.
pub fn embed_program(program: &ConicProgram<Complex64>) -> ConicProgram<f64> {
    ConicProgram {
        blocks: program
            .blocks
            .iter()
            .map(|b| BlockSpec {
                label: b.label.clone(),
                size: 2 * b.size,
            })
            .collect(),
        objective: embed_functional(&program.objective),
        equalities: program
            .equalities
            .iter()
            .map(|eq| Equality {
                functional: embed_functional(&eq.functional),
                rhs: eq.rhs,
            })
            .collect(),
    }
}
