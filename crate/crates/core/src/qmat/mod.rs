//! Dense complex linear algebra for small quantum systems.
//!
//! Everything here is immutable after construction. [`Ket`] and [`Operator`]
//! wrap nalgebra storage and expose the handful of refinements the rest of the
//! crate checks against (unit norm, Hermitian, positive semidefinite, unitary).

mod json;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use json::MatrixJson;

/// Tolerance for the Hermitian refinement of an [`Operator`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalue floor for the PSD refinement of an [`Operator`].
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance for the unitary refinement of an [`Operator`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on the squared norm of a unit [`Ket`].
pub const UNIT_TOL: f64 = 1e-12;
/// Default singular-value ratio below which a set of kets is rank deficient.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmatError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("set of kets is rank deficient (singular value ratio {ratio:.3e} < {tol:.1e})")]
    RankDeficient { ratio: f64, tol: f64 },
    #[error("invalid matrix encoding: {0}")]
    InvalidEncoding(String),
}

pub type Result<T> = std::result::Result<T, QmatError>;

/// A vector in ℂ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QmatError::EmptyDimension);
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn from_vector(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QmatError::EmptyDimension);
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector |index⟩ in ℂ^dim.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= UNIT_TOL
    }

    /// Rescaled copy with unit 2-norm.
    pub fn normalized(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.normalize(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |self⟩⟨self|
    pub fn projector(&self) -> Operator {
        Operator {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// |self⟩ ⊗ |other⟩
    pub fn kron(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// Equality of rays: |⟨u|v⟩| = ‖u‖‖v‖ up to `tol`.
    pub fn same_ray(&self, other: &Ket, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = self.inner(other).norm();
        (overlap - self.norm_squared().sqrt() * other.norm_squared().sqrt()).abs() <= tol
    }
}

/// A square complex matrix acting on ℂ^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: DMatrix<Complex64>,
}

impl Operator {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(QmatError::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(QmatError::EmptyDimension);
        }
        Ok(Self { entries })
    }

    /// Builds from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(QmatError::EmptyDimension);
        }
        if entries.len() != dim * dim {
            return Err(QmatError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self {
            entries: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let flat: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_row_major(dim, &flat)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim > 0);
        Self {
            entries: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0);
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.entries[(i, j)])
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            entries: &self.entries * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim(), other.dim());
        Operator {
            entries: &self.entries + &other.entries,
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim(), other.dim());
        Operator {
            entries: &self.entries - &other.entries,
        }
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim(), other.dim());
        Operator {
            entries: &self.entries * &other.entries,
        }
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        assert_eq!(self.dim(), ket.dim());
        Ket {
            amplitudes: &self.entries * &ket.amplitudes,
        }
    }

    /// tr(self · other).
    pub fn trace_product(&self, other: &Operator) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        // tr(AB) = Σ_ij A_ij B_ji
        self.entries
            .iter()
            .zip(other.entries.transpose().iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Operator {
        Operator {
            entries: (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.hermitian_part().entries);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.hermitian_part().entries);
        eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian() && self.min_eigenvalue() >= -PSD_TOL
    }

    pub fn is_unitary(&self) -> bool {
        let n = self.dim();
        let prod = &self.entries * self.entries.adjoint();
        let id = DMatrix::<Complex64>::identity(n, n);
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            <= UNITARY_TOL
    }
}

/// Kronecker product with block (i, j) equal to `a[i, j] · b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator {
        entries: a.entries.kronecker(&b.entries),
    }
}

/// tr_A of an operator on ℂ^{dim_a} ⊗ ℂ^{dim_b}: Σ_i (⟨i| ⊗ 𝕀) ρ (|i⟩ ⊗ 𝕀).
pub fn partial_trace_a(rho: &Operator, dim_a: usize, dim_b: usize) -> Result<Operator> {
    if dim_a == 0 || dim_b == 0 {
        return Err(QmatError::EmptyDimension);
    }
    if dim_a * dim_b != rho.dim() {
        return Err(QmatError::DimensionMismatch {
            expected: dim_a * dim_b,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    Ok(Operator::from_fn(dim_b, |r, c| {
        (0..dim_a).map(|i| m[(i * dim_b + r, i * dim_b + c)]).sum()
    }))
}

/// Spectrum of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Ket>,
}

impl HermitianEigen {
    /// Unitary whose columns are the eigenvectors.
    pub fn eigenvector_matrix(&self) -> Operator {
        let n = self.eigenvalues.len();
        Operator::from_fn(n, |i, k| self.eigenvectors[k].amplitudes()[i])
    }

    /// V Λ V†
    pub fn reconstruct(&self) -> Operator {
        let v = self.eigenvector_matrix();
        let lam = Operator::diagonal(&self.eigenvalues);
        v.mul(&lam).mul(&v.adjoint())
    }
}

pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    let dev = h.hermiticity_error();
    if dev > HERMITIAN_TOL {
        return Err(QmatError::NotHermitian(dev));
    }
    let eig = nalgebra::SymmetricEigen::new(h.hermitian_part().entries);
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| Ket {
            amplitudes: eig.eigenvectors.column(i).into_owned(),
        })
        .collect();
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Column matrix whose k-th column is `kets[k]`.
pub fn column_matrix(kets: &[Ket]) -> Result<DMatrix<Complex64>> {
    let d = kets.first().ok_or(QmatError::EmptyDimension)?.dim();
    for k in kets {
        if k.dim() != d {
            return Err(QmatError::DimensionMismatch {
                expected: d,
                got: k.dim(),
            });
        }
    }
    Ok(DMatrix::from_fn(d, kets.len(), |i, k| kets[k].amplitudes()[i]))
}

/// A linearly independent set together with its biorthogonal dual.
#[derive(Debug, Clone)]
pub struct DualBasisPair {
    pub primal: Vec<Ket>,
    pub dual: Vec<Ket>,
    pub condition_number: f64,
}

impl DualBasisPair {
    /// max_{a,b} |⟨dual_b|primal_a⟩ − δ_ab|
    pub fn biorthogonality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (b, dual) in self.dual.iter().enumerate() {
            for (a, primal) in self.primal.iter().enumerate() {
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max((dual.inner(primal) - target).norm());
            }
        }
        worst
    }
}

/// Dual set with ⟨dual_b|primal_a⟩ = δ_ab, i.e. the columns of (P⁻¹)† for the
/// column matrix P of `primal`.
pub fn dual_basis(primal: &[Ket], rank_tol: f64) -> Result<DualBasisPair> {
    let p = column_matrix(primal)?;
    if p.nrows() != p.ncols() {
        return Err(QmatError::DimensionMismatch {
            expected: p.nrows(),
            got: p.ncols(),
        });
    }
    let sv = p.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio >= rank_tol) {
        return Err(QmatError::RankDeficient {
            ratio,
            tol: rank_tol,
        });
    }
    let inv = p
        .try_inverse()
        .ok_or(QmatError::RankDeficient { ratio, tol: rank_tol })?;
    let dual_cols = inv.adjoint();
    let dual = (0..dual_cols.ncols())
        .map(|b| Ket {
            amplitudes: dual_cols.column(b).into_owned(),
        })
        .collect();
    Ok(DualBasisPair {
        primal: primal.to_vec(),
        dual,
        condition_number: smax / smin,
    })
}
