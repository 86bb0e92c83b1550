//! The guessing-probability program.
//!
//! Eve holds a classical guess e ∈ {0, …, d−1} and prepares, for each guess,
//! a sub-normalised no-signalling assemblage σ^e_{a|x}. Her success
//! probability for input x* is Σ_e tr σ^e_{e|x*}, maximised subject to the
//! averaged assemblage Σ_e σ^e_{a|x} reproducing the observed violation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::qmat::Operator;
use crate::steering::{
    analytic_pguess_at_max, lhs_bound, unique_distributions, EnsembleOptions, Scenario, SteeringError,
    SteeringFunctional,
};

use super::embed::{embed_program, unembed_dense};
use super::program::{BlockSpec, ConicProgram, LinearFunctional, SparseHermitian};
use super::solver::{solve, SolveError, Solution, SolverOptions, SolverReport, SolverStatus};
use super::CertifyError;

/// How the observed value enters the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaConstraint {
    /// Σ tr F σ = β^obs
    #[default]
    Equality,
    /// Σ tr F σ ≥ β^obs, via a scalar slack block.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub solver: SolverOptions,
    pub constraint: BetaConstraint,
    /// Distance below β_max within which the closed-form guessing
    /// probability is also evaluated.
    pub eps_max: f64,
    /// Negative eigenvalues of returned attack blocks tolerated by the audit.
    pub psd_slack: f64,
    /// Solve the real-embedded program instead of the complex one.
    pub real_embedding: bool,
    pub ensemble: EnsembleOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            constraint: BetaConstraint::Equality,
            eps_max: 1e-6,
            psd_slack: 1e-8,
            real_embedding: false,
            ensemble: EnsembleOptions::default(),
        }
    }
}

/// Orthonormal basis of the d×d Hermitian matrices under Re tr(AB), each
/// element as at most two sparse entries.
fn hermitian_basis(d: usize) -> Vec<SparseHermitian<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(SparseHermitian::new(d, vec![(k, k, Complex64::new(1.0, 0.0))]));
    }
    for k in 0..d {
        for l in k + 1..d {
            out.push(SparseHermitian::new(
                d,
                vec![(k, l, Complex64::new(s, 0.0)), (l, k, Complex64::new(s, 0.0))],
            ));
            out.push(SparseHermitian::new(
                d,
                vec![(k, l, Complex64::new(0.0, -s)), (l, k, Complex64::new(0.0, s))],
            ));
        }
    }
    out
}

fn dense_coeff(op: &Operator) -> SparseHermitian<Complex64> {
    SparseHermitian::from_dense(op.hermitian_part().matrix())
}

/// Variables σ^e_{a|x} for `guesses` labels e, no-signalling per label
/// relative to `x_ref`, and unit total trace.
struct AssemblageBlocks {
    guesses: usize,
    n: usize,
    d: usize,
    dim: usize,
}

impl AssemblageBlocks {
    fn index(&self, e: usize, a: usize, x: usize) -> usize {
        (e * self.n + x) * self.d + a
    }

    fn count(&self) -> usize {
        self.guesses * self.n * self.d
    }

    fn program(&self, x_ref: usize) -> ConicProgram<Complex64> {
        let mut blocks = Vec::with_capacity(self.count());
        for e in 0..self.guesses {
            for x in 0..self.n {
                for a in 0..self.d {
                    blocks.push(BlockSpec {
                        label: format!("e={e},a={a},x={x}"),
                        size: self.dim,
                    });
                }
            }
        }
        let mut p = ConicProgram::new(blocks);
        let basis = hermitian_basis(self.dim);
        for e in 0..self.guesses {
            for x in (0..self.n).filter(|&x| x != x_ref) {
                for b in &basis {
                    let mut f = LinearFunctional::new();
                    for a in 0..self.d {
                        f.push(self.index(e, a, x), b.clone());
                        f.push(self.index(e, a, x_ref), b.scaled(-1.0));
                    }
                    p.add_equality(f, 0.0);
                }
            }
        }
        let mut trace = LinearFunctional::new();
        for e in 0..self.guesses {
            for a in 0..self.d {
                trace.push(self.index(e, a, x_ref), SparseHermitian::identity(self.dim));
            }
        }
        p.add_equality(trace, 1.0);
        p
    }

    /// Σ_e Σ_{a,x} tr F_{a|x} σ^e_{a|x}
    fn value_functional(&self, functional: &SteeringFunctional, sign: f64) -> LinearFunctional<Complex64> {
        let mut f = LinearFunctional::new();
        for e in 0..self.guesses {
            for x in 0..self.n {
                for a in 0..self.d {
                    f.push(self.index(e, a, x), dense_coeff(functional.element(a, x)).scaled(sign));
                }
            }
        }
        f
    }
}

fn solve_with(
    program: &ConicProgram<Complex64>,
    opts: &CertifyOptions,
) -> Result<Solution<Complex64>, CertifyError> {
    program.validate()?;
    if opts.real_embedding {
        solve(&embed_program(program), &opts.solver)
            .map(|s| Solution {
                report: s.report,
                x: s.x.iter().map(unembed_dense).collect(),
                y: s.y,
                z: s.z.iter().map(unembed_dense).collect(),
            })
            .map_err(solve_error)
    } else {
        solve(program, &opts.solver).map_err(solve_error)
    }
}

fn solve_error<T: std::fmt::Debug>(e: SolveError<T>) -> CertifyError {
    match e {
        SolveError::NumericalFailure { best } => CertifyError::NumericalFailure(format!(
            "no convergence after {} iterations (primal {:.6e}, dual {:.6e}, infeasibilities {:.1e}/{:.1e})",
            best.report.iterations,
            best.report.primal_value,
            best.report.dual_value,
            best.report.primal_infeasibility,
            best.report.dual_infeasibility
        )),
        SolveError::Infeasible {
            ray_objective,
            ray_residual,
        } => CertifyError::Infeasible(format!(
            "dual ray with objective {ray_objective:.3e} and residual {ray_residual:.3e}"
        )),
        SolveError::Unbounded { objective } => CertifyError::Unbounded(format!("objective {objective:.3e}")),
        SolveError::EmptyEquality { index, rhs } => {
            CertifyError::MalformedProgram(format!("equality {index} is empty with rhs {rhs}"))
        }
    }
}

/// Upper bound on the program value from any multiplier vector y:
/// b'y plus the negative part of A*(y) − C weighted by a bound on each
/// block's trace.
fn rigorous_dual_bound(program: &ConicProgram<Complex64>, y: &[f64], trace_bounds: &[f64]) -> f64 {
    let mut bound: f64 = program.equalities.iter().zip(y).map(|(eq, y)| eq.rhs * y).sum();
    for (z, tb) in program.dual_slack(y).iter().zip(trace_bounds) {
        let h = (z + z.adjoint()) * Complex64::new(0.5, 0.0);
        let min = h.symmetric_eigenvalues().min();
        if min < 0.0 {
            bound += -min * tb;
        }
    }
    bound
}

fn largest_norm(functional: &SteeringFunctional) -> f64 {
    functional
        .elements()
        .iter()
        .flatten()
        .map(|f| {
            let h = f.hermitian_part();
            h.max_eigenvalue().abs().max(h.min_eigenvalue().abs())
        })
        .fold(0.0, f64::max)
}

/// Per-functional data shared by every β^obs: the classical bound and the
/// range of values any quantum assemblage can produce.
#[derive(Debug, Clone)]
pub struct GuessingSetup {
    functional: SteeringFunctional,
    beta_lhs: Option<f64>,
    beta_min: f64,
    beta_max: f64,
    /// β_max came from the two-set decomposition rather than a solve.
    beta_max_exact: bool,
}

impl GuessingSetup {
    pub fn new(functional: &SteeringFunctional, opts: &CertifyOptions) -> Result<Self, CertifyError> {
        let Scenario {
            n_inputs: n,
            n_outcomes: d,
            dim_b,
        } = *functional.scenario();
        if n < 2 {
            return Err(SteeringError::InvalidScenario(format!("guessing needs at least 2 inputs, got {n}")).into());
        }
        let beta_lhs = match lhs_bound(functional) {
            Ok(v) => Some(v),
            Err(SteeringError::EnumerationTooLarge { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let blocks = AssemblageBlocks {
            guesses: 1,
            n,
            d,
            dim: dim_b,
        };
        let trace_bounds = vec![1.0; blocks.count()];
        let extreme = |sign: f64| -> Result<f64, CertifyError> {
            let mut p = blocks.program(0);
            p.objective = blocks.value_functional(functional, sign);
            let sol = solve_with(&p, opts)?;
            Ok(sign * rigorous_dual_bound(&p, &sol.y, &trace_bounds))
        };

        let exact_max = functional.basis_kets().filter(|k| k.len() == 2).and_then(|kets| {
            unique_distributions(&kets[0], &kets[1], &opts.ensemble)
                .ok()
                .filter(|u| u.nonnegative)
                .map(|_| n as f64)
        });
        let (beta_max, beta_max_exact) = match exact_max {
            Some(v) => (v, true),
            None => (extreme(1.0)?, false),
        };
        let beta_min = extreme(-1.0)?;
        Ok(Self {
            functional: functional.clone(),
            beta_lhs,
            beta_min,
            beta_max,
            beta_max_exact,
        })
    }

    pub fn functional(&self) -> &SteeringFunctional {
        &self.functional
    }

    /// Classical bound; `None` when the strategy enumeration is too large.
    pub fn beta_lhs(&self) -> Option<f64> {
        self.beta_lhs
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn beta_max_exact(&self) -> bool {
        self.beta_max_exact
    }

    /// Rejects β^obs outside [β_min, β_max] by more than `feas_tol`.
    pub fn check_beta(&self, beta: f64, feas_tol: f64) -> Result<(), CertifyError> {
        if !beta.is_finite() || beta > self.beta_max + feas_tol || beta < self.beta_min - feas_tol {
            return Err(CertifyError::BetaOutOfRange {
                beta,
                min: self.beta_min,
                max: self.beta_max,
            });
        }
        Ok(())
    }

    fn blocks(&self) -> AssemblageBlocks {
        let s = self.functional.scenario();
        AssemblageBlocks {
            guesses: s.n_outcomes,
            n: s.n_inputs,
            d: s.n_outcomes,
            dim: s.dim_b,
        }
    }

    /// The guessing program for `beta_obs` and input `x_star`.
    pub fn program(
        &self,
        beta_obs: f64,
        x_star: usize,
        constraint: BetaConstraint,
        feas_tol: f64,
    ) -> Result<ConicProgram<Complex64>, CertifyError> {
        self.functional.scenario().check_input(x_star)?;
        self.check_beta(beta_obs, feas_tol)?;
        let blocks = self.blocks();
        let mut p = blocks.program(x_star);
        let mut value = blocks.value_functional(&self.functional, 1.0);
        if constraint == BetaConstraint::AtLeast {
            p.blocks.push(BlockSpec {
                label: "slack".into(),
                size: 1,
            });
            let slack = p.blocks.len() - 1;
            value.push(slack, SparseHermitian::new(1, vec![(0, 0, Complex64::new(-1.0, 0.0))]));
        }
        p.add_equality(value, beta_obs);
        for e in 0..blocks.guesses {
            p.objective
                .push(blocks.index(e, e, x_star), SparseHermitian::identity(blocks.dim));
        }
        Ok(p)
    }

    fn trace_bounds(&self, program: &ConicProgram<Complex64>, beta_obs: f64) -> Vec<f64> {
        let n = self.functional.scenario().n_inputs as f64;
        let slack_bound = (n * largest_norm(&self.functional) - beta_obs).max(0.0);
        program
            .blocks
            .iter()
            .map(|b| if b.label == "slack" { slack_bound } else { 1.0 })
            .collect()
    }

    /// Solves the guessing program and certifies the dual bound.
    pub fn certify(&self, beta_obs: f64, x_star: usize, opts: &CertifyOptions) -> Result<GuessingCertificate, CertifyError> {
        let program = self.program(beta_obs, x_star, opts.constraint, opts.solver.feas_tol)?;
        let sol = solve_with(&program, opts)?;
        let d = self.functional.scenario().n_outcomes;
        let dual_bound = rigorous_dual_bound(&program, &sol.y, &self.trace_bounds(&program, beta_obs));
        let p_guess_dual = dual_bound.min(1.0);
        let h_min_bits = (-p_guess_dual.log2()).max(0.0);
        let blocks = self.blocks();
        let attack = Attack {
            sigma: (0..blocks.guesses)
                .map(|e| {
                    (0..blocks.n)
                        .map(|x| {
                            (0..blocks.d)
                                .map(|a| {
                                    Operator::from_matrix(sol.x[blocks.index(e, a, x)].clone())
                                        .expect("square block")
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        };
        let analytic_pguess = if beta_obs >= self.beta_max - opts.eps_max {
            analytic_pguess_at_max(&self.functional, x_star, &opts.ensemble).ok()
        } else {
            None
        };
        Ok(GuessingCertificate {
            d,
            beta_obs,
            x_star,
            p_guess_primal: sol.report.primal_value,
            p_guess_dual,
            h_min_bits,
            analytic_discrepancy: analytic_pguess.map(|q| (q - p_guess_dual).abs()),
            analytic_pguess,
            constraint: opts.constraint,
            report: sol.report,
            attack: Some(attack),
        })
    }
}

/// Eve's optimal attack, `sigma[e][x][a]` = σ^e_{a|x}.
#[derive(Debug, Clone)]
pub struct Attack {
    pub sigma: Vec<Vec<Vec<Operator>>>,
}

/// Residuals of an attack, measured directly on the returned blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackAudit {
    /// max_e max_{x,x'} ‖Σ_a σ^e_{a|x} − Σ_a σ^e_{a|x'}‖_max
    pub no_signalling: f64,
    /// |Σ_{e,a} tr σ^e_{a|x*} − 1|
    pub trace: f64,
    /// Σ_{a,x,e} tr F σ − β^obs (signed)
    pub value: f64,
    /// −min(0, smallest eigenvalue over all blocks)
    pub psd: f64,
    /// Σ_e tr σ^e_{e|x*}
    pub objective: f64,
}

impl AttackAudit {
    /// All residuals within `tol`; with `at_least`, the value may exceed β^obs.
    pub fn within(&self, tol: f64, constraint: BetaConstraint) -> bool {
        let value_ok = match constraint {
            BetaConstraint::Equality => self.value.abs() <= tol,
            BetaConstraint::AtLeast => self.value >= -tol,
        };
        self.no_signalling <= tol && self.trace <= tol && self.psd <= tol && value_ok
    }
}

impl Attack {
    pub fn audit(&self, functional: &SteeringFunctional, beta_obs: f64, x_star: usize) -> AttackAudit {
        let mut no_signalling: f64 = 0.0;
        let mut trace = 0.0;
        let mut value = 0.0;
        let mut psd: f64 = 0.0;
        let mut objective = 0.0;
        for (e, per_e) in self.sigma.iter().enumerate() {
            let marginals: Vec<DMatrix<Complex64>> = per_e
                .iter()
                .map(|slice| slice.iter().map(|s| s.matrix().clone()).sum())
                .collect();
            for m in &marginals[1..] {
                no_signalling = no_signalling.max((m - &marginals[0]).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            trace += marginals[x_star].trace().re;
            objective += per_e[x_star][e].trace().re;
            for (x, slice) in per_e.iter().enumerate() {
                for (a, s) in slice.iter().enumerate() {
                    value += functional.element(a, x).trace_product(s).re;
                    psd = psd.max(-s.hermitian_part().min_eigenvalue());
                }
            }
        }
        AttackAudit {
            no_signalling,
            trace: (trace - 1.0).abs(),
            value: value - beta_obs,
            psd: psd.max(0.0),
            objective,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GuessingCertificate {
    pub d: usize,
    pub beta_obs: f64,
    pub x_star: usize,
    /// Value of the returned attack.
    pub p_guess_primal: f64,
    /// Certified upper bound on Eve's guessing probability.
    pub p_guess_dual: f64,
    /// −log₂ p_guess_dual
    pub h_min_bits: f64,
    pub report: SolverReport,
    pub attack: Option<Attack>,
    pub constraint: BetaConstraint,
    /// max_a q_{a|x*} from the two-set decomposition, near the maximal value.
    pub analytic_pguess: Option<f64>,
    pub analytic_discrepancy: Option<f64>,
}

impl GuessingCertificate {
    pub fn status(&self) -> SolverStatus {
        self.report.status
    }
}

/// Builds the guessing program for one functional and β^obs.
pub fn build_guessing_program(
    functional: &SteeringFunctional,
    beta_obs: f64,
    x_star: usize,
    opts: &CertifyOptions,
) -> Result<ConicProgram<Complex64>, CertifyError> {
    GuessingSetup::new(functional, opts)?.program(beta_obs, x_star, opts.constraint, opts.solver.feas_tol)
}

pub fn guessing_probability(
    functional: &SteeringFunctional,
    beta_obs: f64,
    x_star: usize,
    opts: &CertifyOptions,
) -> Result<GuessingCertificate, CertifyError> {
    GuessingSetup::new(functional, opts)?.certify(beta_obs, x_star, opts)
}

/// (β_min, β_max) for a functional.
pub fn beta_range(functional: &SteeringFunctional, opts: &CertifyOptions) -> Result<(f64, f64), CertifyError> {
    let s = GuessingSetup::new(functional, opts)?;
    Ok((s.beta_min, s.beta_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::{result2_functional, SchmidtSpec};

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = a.trace_with(&b.to_dense());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-15, "{i} {j} {ip}");
            }
            assert!(a.hermiticity_error() < 1e-15);
        }
    }

    #[test]
    fn qubit_program_shape() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        let opts = CertifyOptions::default();
        let setup = GuessingSetup::new(&f, &opts).unwrap();
        let p = setup.program(1.9, 1, BetaConstraint::Equality, 1e-7).unwrap();
        assert_eq!(p.blocks.len(), 8);
        assert!(p.blocks.iter().all(|b| b.size == 2));
        // 2 guesses × 1 other input × 4 real equations, trace, value
        assert_eq!(p.equalities.len(), 2 * 4 + 2);
        p.validate().unwrap();

        let f3 = result2_functional(&SchmidtSpec::maximal(3)).unwrap();
        let s3 = GuessingSetup::new(&f3, &opts).unwrap();
        let p3 = s3.program(1.9, 0, BetaConstraint::Equality, 1e-7).unwrap();
        assert_eq!(p3.blocks.len(), 18);
    }

    #[test]
    fn beta_above_maximum_rejected() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        let opts = CertifyOptions::default();
        let setup = GuessingSetup::new(&f, &opts).unwrap();
        assert!(setup.beta_max_exact());
        assert_eq!(setup.beta_max(), 2.0);
        assert!(matches!(
            setup.program(2.5, 1, BetaConstraint::Equality, 1e-7),
            Err(CertifyError::BetaOutOfRange { .. })
        ));
        assert!(matches!(
            setup.program(1.9, 2, BetaConstraint::Equality, 1e-7),
            Err(CertifyError::Steering(SteeringError::InputOutOfRange { .. }))
        ));
    }

    #[test]
    fn solved_maximum_matches_exact_maximum() {
        let f = result2_functional(&SchmidtSpec::new(vec![0.6, 0.4]).unwrap()).unwrap();
        let opts = CertifyOptions::default();
        let exact = GuessingSetup::new(&f, &opts).unwrap();
        // a general functional with the same elements but no recovered kets
        let blocks = AssemblageBlocks { guesses: 1, n: 2, d: 2, dim: 2 };
        let mut p = blocks.program(0);
        p.objective = blocks.value_functional(&f, 1.0);
        let sol = solve_with(&p, &opts).unwrap();
        assert!((sol.report.primal_value - exact.beta_max()).abs() < 1e-6);
        assert!(exact.beta_min() >= -1e-7 && exact.beta_min() < exact.beta_lhs().unwrap());
    }

    /// Reference values 1/2 + √(ε(1 − ε)) for the maximally entangled qubit
    /// at β = 2 − ε, x* = 1, from two independent external SDP solvers.
    #[test]
    fn near_maximal_violation_qubit() {
        let f = result2_functional(&SchmidtSpec::maximal(2)).unwrap();
        let opts = CertifyOptions::default();
        let setup = GuessingSetup::new(&f, &opts).unwrap();
        for eps in [1e-2f64, 1e-3, 1e-4] {
            let want = 0.5 + (eps * (1.0 - eps)).sqrt();
            let cert = setup.certify(2.0 - eps, 1, &opts).unwrap();
            assert_eq!(cert.status(), SolverStatus::Optimal);
            assert!((cert.p_guess_dual - want).abs() < 1e-6, "{eps}: {} vs {want}", cert.p_guess_dual);
            assert!(cert.p_guess_primal <= cert.p_guess_dual + opts.solver.gap_tol);
            let audit = cert.attack.as_ref().unwrap().audit(&f, 2.0 - eps, 1);
            assert!(audit.within(1e-6, BetaConstraint::Equality), "{audit:?}");
        }
        let eps = 1e-6f64;
        let cert = setup.certify(2.0 - eps, 1, &opts).unwrap();
        let want = 0.5 + (eps * (1.0 - eps)).sqrt();
        assert!(cert.p_guess_dual >= want - 1e-9);
        assert!(cert.p_guess_dual - want < 1e-6);
        assert!(cert.analytic_pguess.is_some());
    }
}
