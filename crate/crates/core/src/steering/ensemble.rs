//! Unique weights for two linearly independent sets that decompose the same
//! operator: Σ_a q_a |φ_a⟩⟨φ_a| = Σ_i λ_i |λ_i⟩⟨λ_i|.
//!
//! Sandwiching the identity between the dual vectors ⟨ψ_b| and |ω_j⟩ gives
//! q_b ⟨φ_b|ω_j⟩ = λ_j ⟨ψ_b|λ_j⟩, so every column j of the ratio matrix
//! R_bj = ⟨ψ_b|λ_j⟩ / ⟨φ_b|ω_j⟩ is proportional to q and every row b is
//! inversely proportional to λ. All columns and rows are evaluated; their
//! spread is reported as `consistency_residual`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::qmat::{dual_basis, Ket, Operator, DEFAULT_RANK_TOL};

use super::{Result, SteeringError, SteeringFunctional};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub rank_tol: f64,
    /// Smallest admissible |u_i^a| and |v_a^i|.
    pub coeff_floor: f64,
    /// Bound on the ensemble residual and on the disagreement with the
    /// linear-solve cross-check.
    pub verify_tol: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            coeff_floor: 1e-8,
            verify_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UniqueDistributions {
    pub q: Vec<f64>,
    pub lam: Vec<f64>,
    /// `expansion_u[(i, a)]` = u_i^a with |φ_a⟩ = Σ_i u_i^a |λ_i⟩.
    pub expansion_u: DMatrix<Complex64>,
    /// `expansion_v[(a, i)]` = v_a^i with |λ_i⟩ = Σ_a v_a^i |φ_a⟩.
    pub expansion_v: DMatrix<Complex64>,
    /// Spread of the closed-form weights across the free index, plus any
    /// leftover imaginary part.
    pub consistency_residual: f64,
    /// max |Σ q_a|φ_a⟩⟨φ_a| − Σ λ_i|λ_i⟩⟨λ_i||.
    pub ensemble_residual: f64,
    /// max distance between the closed form and the linear-solve solution.
    pub oracle_discrepancy: f64,
    /// Both weight vectors are entrywise non-negative (within 1e-9).
    pub nonnegative: bool,
}

impl UniqueDistributions {
    pub fn require_nonnegative(self) -> Result<Self> {
        if self.nonnegative {
            Ok(self)
        } else {
            let min_entry = self
                .q
                .iter()
                .chain(&self.lam)
                .copied()
                .fold(f64::INFINITY, f64::min);
            Err(SteeringError::NoNonnegativeSolution { min_entry })
        }
    }
}

pub fn unique_distributions(
    set_a: &[Ket],
    set_b: &[Ket],
    opts: &EnsembleOptions,
) -> Result<UniqueDistributions> {
    let phi: Vec<Ket> = set_a.iter().map(Ket::normalized).collect();
    let lambda: Vec<Ket> = set_b.iter().map(Ket::normalized).collect();
    let pair_a = dual_basis(&phi, opts.rank_tol)?;
    let pair_b = dual_basis(&lambda, opts.rank_tol)?;
    if phi.len() != lambda.len() || phi[0].dim() != lambda[0].dim() {
        return Err(SteeringError::ScenarioMismatch(format!(
            "sets of size {} and {}",
            phi.len(),
            lambda.len()
        )));
    }
    let d = phi.len();
    let (psi, omega) = (&pair_a.dual, &pair_b.dual);

    let u = DMatrix::from_fn(d, d, |i, a| omega[i].inner(&phi[a]));
    let v = DMatrix::from_fn(d, d, |a, i| psi[a].inner(&lambda[i]));
    let smallest = u
        .iter()
        .chain(v.iter())
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if smallest < opts.coeff_floor {
        return Err(SteeringError::VanishingCoefficient {
            value: smallest,
            floor: opts.coeff_floor,
        });
    }

    // ⟨φ_b|ω_j⟩ = conj(u_j^b), ⟨ψ_b|λ_j⟩ = v_b^j
    let ratio = DMatrix::from_fn(d, d, |b, j| v[(b, j)] / u[(j, b)].conj());

    let columns: Vec<Vec<Complex64>> = (0..d)
        .map(|j| normalize_sum((0..d).map(|b| ratio[(b, j)]).collect()))
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..d)
        .map(|b| normalize_sum((0..d).map(|j| ratio[(b, j)].inv()).collect()))
        .collect();
    let (q_mean, q_spread) = mean_and_spread(&columns);
    let (lam_mean, lam_spread) = mean_and_spread(&rows);
    let imag = q_mean
        .iter()
        .chain(&lam_mean)
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let q: Vec<f64> = q_mean.iter().map(|z| z.re).collect();
    let lam: Vec<f64> = lam_mean.iter().map(|z| z.re).collect();

    let ensemble_residual = mixture(&phi, &q).max_abs_diff(&mixture(&lambda, &lam));
    if !(ensemble_residual <= opts.verify_tol) {
        return Err(SteeringError::NoCommonDecomposition {
            residual: ensemble_residual,
        });
    }

    let (oracle_q, oracle_lam) = linear_solve_oracle(&phi, &lambda)?;
    let oracle_discrepancy = q
        .iter()
        .zip(&oracle_q)
        .chain(lam.iter().zip(&oracle_lam))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(oracle_discrepancy <= opts.verify_tol) {
        return Err(SteeringError::OracleDisagreement {
            discrepancy: oracle_discrepancy,
        });
    }

    let nonnegative = q.iter().chain(&lam).all(|&w| w >= -1e-9);
    Ok(UniqueDistributions {
        q,
        lam,
        expansion_u: u,
        expansion_v: v,
        consistency_residual: q_spread.max(lam_spread).max(imag),
        ensemble_residual,
        oracle_discrepancy,
        nonnegative,
    })
}

fn normalize_sum(v: Vec<Complex64>) -> Vec<Complex64> {
    let s: Complex64 = v.iter().sum();
    v.into_iter().map(|z| z / s).collect()
}

fn mean_and_spread(samples: &[Vec<Complex64>]) -> (Vec<Complex64>, f64) {
    let d = samples[0].len();
    let count = samples.len() as f64;
    let mean: Vec<Complex64> = (0..d)
        .map(|k| samples.iter().map(|s| s[k]).sum::<Complex64>() / count)
        .collect();
    let spread = samples
        .iter()
        .flat_map(|s| s.iter().zip(&mean).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    (mean, spread)
}

fn mixture(kets: &[Ket], weights: &[f64]) -> Operator {
    kets.iter()
        .zip(weights)
        .map(|(k, &w)| k.projector().scale(w))
        .reduce(|a, b| a.add(&b))
        .expect("nonempty set")
}

/// Independent route: solve Σ_a q_a P_a − Σ_i λ_i Q_i = 0, Σ_a q_a = 1 as an
/// overdetermined real linear system and require a unique solution.
fn linear_solve_oracle(phi: &[Ket], lambda: &[Ket]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = phi.len();
    let n = phi[0].dim();
    let rows = 2 * n * n + 1;
    let projectors: Vec<Operator> = phi
        .iter()
        .map(Ket::projector)
        .chain(lambda.iter().map(|k| k.projector().scale(-1.0)))
        .collect();
    let mut a = DMatrix::<f64>::zeros(rows, 2 * d);
    for (col, p) in projectors.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let z = p.get(r, c);
                a[(2 * (r * n + c), col)] = z.re;
                a[(2 * (r * n + c) + 1, col)] = z.im;
            }
        }
    }
    for col in 0..d {
        a[(rows - 1, col)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(rows);
    rhs[rows - 1] = 1.0;

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(SteeringError::NoCommonDecomposition { residual: f64::NAN });
    }
    let w = svd
        .solve(&rhs, 0.0)
        .map_err(|e| SteeringError::InvariantViolated(e.to_string()))?;
    let residual = (&a * &w - &rhs).amax();
    if residual > 1e-8 {
        return Err(SteeringError::NoCommonDecomposition { residual });
    }
    Ok((w.rows(0, d).iter().copied().collect(), w.rows(d, d).iter().copied().collect()))
}

/// Exact guessing probability at the maximal violation of a two-input rank-1
/// functional: max_a q_{a|x*} for the unique pair of distributions over the
/// two projector sets.
pub fn analytic_pguess_at_max(
    functional: &SteeringFunctional,
    x_star: usize,
    opts: &EnsembleOptions,
) -> Result<f64> {
    let kets = functional.basis_kets().ok_or(SteeringError::NotRankOne)?;
    if kets.len() != 2 {
        return Err(SteeringError::NotRankOne);
    }
    functional.scenario().check_input(x_star)?;
    let dists = unique_distributions(&kets[0], &kets[1], opts)?.require_nonnegative()?;
    let q = if x_star == 0 { &dists.q } else { &dists.lam };
    Ok(q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}
