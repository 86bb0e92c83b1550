//! Primal-dual interior-point method for block semidefinite programs.
//!
//! Infeasible-start path following with the HKM search direction and a
//! Mehrotra predictor-corrector step. The dual problem is
//!
//! ```text
//! minimize   bᵀy
//! subject to Σ_i y_i A_ij − C_j = Z_j ⪰ 0
//! ```
//!
//! so `dual_value ≥ primal_value` at any feasible pair. The Schur complement
//! matrix M_ik = Re tr(A_i X A_k Z⁻¹) is assembled block by block. When a few
//! equalities touch many blocks and the rest split into independent groups,
//! M is factored as a bordered block-diagonal ("arrow") matrix.

use std::fmt::Debug;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::program::{ConicProgram, Field, SparseHermitian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::NearOptimal => "near_optimal",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::NumericalFailure => "numerical_failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "optimal" => SolverStatus::Optimal,
            "near_optimal" => SolverStatus::NearOptimal,
            "infeasible" => SolverStatus::Infeasible,
            "unbounded" => SolverStatus::Unbounded,
            "numerical_failure" => SolverStatus::NumericalFailure,
            _ => return None,
        })
    }
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// dual_value − primal_value
    pub gap: f64,
    pub iterations: usize,
    pub wall_time: f64,
    /// ‖b − A(X)‖ / (1 + ‖b‖)
    pub primal_infeasibility: f64,
    /// ‖C − A*(y) + Z‖ / (1 + ‖C‖)
    pub dual_infeasibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Tolerance multiplier under which a stalled solve still counts as
    /// near-optimal.
    pub near_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-7,
            max_iter: 120,
            near_factor: 1e3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub report: SolverReport,
    /// Primal blocks X_j.
    pub x: Vec<DMatrix<T>>,
    /// Equality multipliers, one per equality of the program.
    pub y: Vec<f64>,
    /// Dual slack blocks Z_j.
    pub z: Vec<DMatrix<T>>,
}

#[derive(Debug, Error)]
pub enum SolveError<T: Debug> {
    #[error("solver stalled after {} iterations (gap {:.3e})", .best.report.iterations, .best.report.gap)]
    NumericalFailure { best: Box<Solution<T>> },
    #[error("primal infeasible: dual ray with bᵀy = {ray_objective:.3e}, residual {ray_residual:.3e}")]
    Infeasible { ray_objective: f64, ray_residual: f64 },
    #[error("primal unbounded: objective reached {objective:.3e}")]
    Unbounded { objective: f64 },
    #[error("equality {index} has no coefficients but right-hand side {rhs}")]
    EmptyEquality { index: usize, rhs: f64 },
}

struct Coeff<T> {
    con: usize,
    sparse: SparseHermitian<T>,
    dense: Option<DMatrix<T>>,
}

/// Per-block view of the program with empty equalities removed.
struct Prepared<T> {
    sizes: Vec<usize>,
    per_block: Vec<Vec<Coeff<T>>>,
    c: Vec<DMatrix<T>>,
    b: Vec<f64>,
    /// Index into the program's equality list for each kept equality.
    kept: Vec<usize>,
}

impl<T: Field> Prepared<T> {
    fn new(program: &ConicProgram<T>, feas_tol: f64) -> Result<Self, SolveError<T>> {
        let sizes: Vec<usize> = program.blocks.iter().map(|b| b.size).collect();
        let mut per_block: Vec<Vec<Coeff<T>>> = sizes.iter().map(|_| Vec::new()).collect();
        let mut kept = Vec::new();
        let mut b = Vec::new();
        for (index, eq) in program.equalities.iter().enumerate() {
            if eq.functional.is_empty() {
                if eq.rhs.abs() > feas_tol {
                    return Err(SolveError::EmptyEquality { index, rhs: eq.rhs });
                }
                continue;
            }
            let con = kept.len();
            kept.push(index);
            b.push(eq.rhs);
            // merge repeated references to one block
            let mut merged: Vec<(usize, Vec<(usize, usize, T)>)> = Vec::new();
            for (j, a) in &eq.functional.terms {
                match merged.iter_mut().find(|(k, _)| k == j) {
                    Some((_, entries)) => entries.extend_from_slice(a.entries()),
                    None => merged.push((*j, a.entries().to_vec())),
                }
            }
            for (j, entries) in merged {
                let sparse = SparseHermitian::new(sizes[j], entries);
                if sparse.is_empty() {
                    continue;
                }
                let dense = (sparse.nnz() > 2 * sizes[j]).then(|| sparse.to_dense());
                per_block[j].push(Coeff { con, sparse, dense });
            }
        }
        let mut c: Vec<DMatrix<T>> = sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (j, a) in &program.objective.terms {
            a.add_into(&mut c[*j], 1.0);
        }
        Ok(Self {
            sizes,
            per_block,
            c,
            b,
            kept,
        })
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn nu(&self) -> f64 {
        self.sizes.iter().sum::<usize>() as f64
    }

    fn apply_a(&self, xs: &[DMatrix<T>]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for (coeffs, x) in self.per_block.iter().zip(xs) {
            for c in coeffs {
                out[c.con] += c.sparse.trace_with(x);
            }
        }
        out
    }

    fn apply_at(&self, y: &[f64]) -> Vec<DMatrix<T>> {
        self.per_block
            .iter()
            .zip(&self.sizes)
            .map(|(coeffs, &n)| {
                let mut m = DMatrix::zeros(n, n);
                for c in coeffs {
                    c.sparse.add_into(&mut m, y[c.con]);
                }
                m
            })
            .collect()
    }
}

fn herm<T: Field>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.adjoint()) * T::from_real(0.5)
}

fn inner<T: Field>(a: &[DMatrix<T>], b: &[DMatrix<T>]) -> f64 {
    a.iter().zip(b).map(|(x, z)| x.dotc(z).real()).sum()
}

fn frob<T: Field>(a: &[DMatrix<T>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest α with x + α·dx ⪰ 0 (infinite when dx ⪰ 0).
fn max_step<T: Field>(x: &DMatrix<T>, dx: &DMatrix<T>) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let w = l.solve_lower_triangular(dx)?;
    let v = l.solve_lower_triangular(&w.adjoint())?;
    let lam_min = herm(&v)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Some(if lam_min >= 0.0 { f64::INFINITY } else { -1.0 / lam_min })
}

fn max_step_all<T: Field>(xs: &[DMatrix<T>], dxs: &[DMatrix<T>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        alpha = alpha.min(max_step(x, dx)?);
    }
    Some(alpha)
}

fn hermitian_inverse<T: Field>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    Cholesky::new(m.clone()).map(|c| herm(&c.inverse()))
}

/// Where each equality lives in the bordered block-diagonal layout.
#[derive(Debug, Clone, Copy)]
enum Part {
    Group(usize, usize),
    Link(usize),
}

struct SchurLayout {
    parts: Vec<Part>,
    group_sizes: Vec<usize>,
    n_link: usize,
}

impl SchurLayout {
    fn dense(m: usize) -> Self {
        Self {
            parts: (0..m).map(|i| Part::Group(0, i)).collect(),
            group_sizes: vec![m],
            n_link: 0,
        }
    }

    fn new<T: Field>(prep: &Prepared<T>) -> Self {
        let m = prep.m();
        let nb = prep.sizes.len();
        if nb < 8 || m < 16 {
            return Self::dense(m);
        }
        let mut blocks_of: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, coeffs) in prep.per_block.iter().enumerate() {
            for c in coeffs {
                if blocks_of[c.con].last() != Some(&j) {
                    blocks_of[c.con].push(j);
                }
            }
        }
        let threshold = nb / 4;
        let is_link: Vec<bool> = blocks_of.iter().map(|b| b.len() > threshold).collect();

        let mut parent: Vec<usize> = (0..nb).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (i, blocks) in blocks_of.iter().enumerate() {
            if is_link[i] {
                continue;
            }
            for w in blocks.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut group_of_root: Vec<Option<usize>> = vec![None; nb];
        let mut group_sizes = Vec::new();
        let mut n_link = 0;
        let mut parts = Vec::with_capacity(m);
        for i in 0..m {
            if is_link[i] {
                parts.push(Part::Link(n_link));
                n_link += 1;
                continue;
            }
            let root = find(&mut parent, blocks_of[i][0]);
            let g = *group_of_root[root].get_or_insert_with(|| {
                group_sizes.push(0);
                group_sizes.len() - 1
            });
            parts.push(Part::Group(g, group_sizes[g]));
            group_sizes[g] += 1;
        }
        let largest = group_sizes.iter().copied().max().unwrap_or(0);
        if group_sizes.len() < 2 || largest * 10 > m * 6 {
            return Self::dense(m);
        }
        Self {
            parts,
            group_sizes,
            n_link,
        }
    }
}

/// M stored as diagonal groups D_g, borders B_g (group × link) and the
/// link-link block E.
struct SchurMatrix {
    groups: Vec<DMatrix<f64>>,
    borders: Vec<DMatrix<f64>>,
    link: DMatrix<f64>,
}

impl SchurMatrix {
    fn zeros(layout: &SchurLayout) -> Self {
        Self {
            groups: layout.group_sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
            borders: layout
                .group_sizes
                .iter()
                .map(|&s| DMatrix::zeros(s, layout.n_link))
                .collect(),
            link: DMatrix::zeros(layout.n_link, layout.n_link),
        }
    }

    /// Adds `v` at (i, k) and (k, i).
    fn add_sym(&mut self, layout: &SchurLayout, i: usize, k: usize, v: f64) {
        match (layout.parts[i], layout.parts[k]) {
            (Part::Group(g, a), Part::Group(h, b)) => {
                debug_assert_eq!(g, h);
                self.groups[g][(a, b)] += v;
                if a != b {
                    self.groups[g][(b, a)] += v;
                }
            }
            (Part::Group(g, a), Part::Link(t)) | (Part::Link(t), Part::Group(g, a)) => {
                self.borders[g][(a, t)] += v;
            }
            (Part::Link(s), Part::Link(t)) => {
                self.link[(s, t)] += v;
                if s != t {
                    self.link[(t, s)] += v;
                }
            }
        }
    }
}

fn regularized_cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if m.nrows() == 0 {
        return Cholesky::new(m.clone());
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = 1.0 + m.diagonal().amax();
    for delta in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += delta * scale;
        }
        if let Some(c) = Cholesky::new(r) {
            return Some(c);
        }
    }
    None
}

struct SchurFactor {
    groups: Vec<Cholesky<f64, Dyn>>,
    borders: Vec<DMatrix<f64>>,
    /// D_g⁻¹ B_g
    w: Vec<DMatrix<f64>>,
    schur: Cholesky<f64, Dyn>,
}

impl SchurFactor {
    fn new(mut mat: SchurMatrix) -> Option<Self> {
        let groups: Vec<Cholesky<f64, Dyn>> = mat
            .groups
            .iter()
            .map(regularized_cholesky)
            .collect::<Option<_>>()?;
        let w: Vec<DMatrix<f64>> = groups
            .iter()
            .zip(&mat.borders)
            .map(|(c, b)| c.solve(b))
            .collect();
        for (b, wg) in mat.borders.iter().zip(&w) {
            mat.link -= b.transpose() * wg;
        }
        let schur = regularized_cholesky(&mat.link)?;
        Some(Self {
            groups,
            borders: mat.borders,
            w,
            schur,
        })
    }

    fn solve(&self, layout: &SchurLayout, h: &[f64]) -> Vec<f64> {
        let mut hg: Vec<DVector<f64>> = layout.group_sizes.iter().map(|&s| DVector::zeros(s)).collect();
        let mut hl = DVector::zeros(layout.n_link);
        for (i, part) in layout.parts.iter().enumerate() {
            match *part {
                Part::Group(g, a) => hg[g][a] = h[i],
                Part::Link(t) => hl[t] = h[i],
            }
        }
        let t: Vec<DVector<f64>> = self.groups.iter().zip(&hg).map(|(c, v)| c.solve(v)).collect();
        for (b, tg) in self.borders.iter().zip(&t) {
            hl -= b.transpose() * tg;
        }
        let yl = if layout.n_link > 0 {
            self.schur.solve(&hl)
        } else {
            hl
        };
        let yg: Vec<DVector<f64>> = t
            .iter()
            .zip(&self.w)
            .map(|(tg, wg)| tg - wg * &yl)
            .collect();
        layout
            .parts
            .iter()
            .map(|part| match *part {
                Part::Group(g, a) => yg[g][a],
                Part::Link(t) => yl[t],
            })
            .collect()
    }
}

/// X A Z⁻¹ for one coefficient.
fn left_right<T: Field>(x: &DMatrix<T>, coeff: &Coeff<T>, zinv: &DMatrix<T>) -> DMatrix<T> {
    if let Some(dense) = &coeff.dense {
        return x * dense * zinv;
    }
    let n = x.nrows();
    let mut g = DMatrix::zeros(n, n);
    for &(r, c, v) in coeff.sparse.entries() {
        for col in 0..n {
            let s = v * zinv[(c, col)];
            for row in 0..n {
                g[(row, col)] += x[(row, r)] * s;
            }
        }
    }
    g
}

fn assemble<T: Field>(
    prep: &Prepared<T>,
    layout: &SchurLayout,
    x: &[DMatrix<T>],
    zinv: &[DMatrix<T>],
) -> SchurMatrix {
    let mut mat = SchurMatrix::zeros(layout);
    for (j, coeffs) in prep.per_block.iter().enumerate() {
        let g: Vec<DMatrix<T>> = coeffs.iter().map(|c| left_right(&x[j], c, &zinv[j])).collect();
        for (p, gp) in g.iter().enumerate() {
            for cq in &coeffs[p..] {
                let v = cq.sparse.trace_with(gp);
                mat.add_sym(layout, coeffs[p].con, cq.con, v);
            }
        }
    }
    mat
}

struct Direction<T> {
    dx: Vec<DMatrix<T>>,
    dy: Vec<f64>,
    dz: Vec<DMatrix<T>>,
}

struct Iterate<'a, T> {
    prep: &'a Prepared<T>,
    layout: &'a SchurLayout,
    factor: &'a SchurFactor,
    x: &'a [DMatrix<T>],
    zinv: &'a [DMatrix<T>],
    rd: &'a [DMatrix<T>],
    rp: &'a [f64],
    /// X R_d Z⁻¹
    x_rd_zinv: &'a [DMatrix<T>],
}

impl<T: Field> Iterate<'_, T> {
    /// Solves for the direction whose complementarity part reads
    /// ΔX = R_c − X ΔZ Z⁻¹ (Hermitian part).
    fn direction(&self, rc: &[DMatrix<T>]) -> Direction<T> {
        let rhs: Vec<DMatrix<T>> = rc.iter().zip(self.x_rd_zinv).map(|(a, b)| a + b).collect();
        let ar = self.prep.apply_a(&rhs);
        let h: Vec<f64> = ar.iter().zip(self.rp).map(|(a, r)| a - r).collect();
        let mut dy = self.factor.solve(self.layout, &h);
        let mut dir = self.complete(rc, dy.clone());
        // Refine against the exact operator: A(ΔX) must reproduce r_p.
        let scale = 1.0 + norm2(self.rp);
        for _ in 0..REFINE_STEPS {
            let r: Vec<f64> = self
                .prep
                .apply_a(&dir.dx)
                .iter()
                .zip(self.rp)
                .map(|(a, r)| a - r)
                .collect();
            if norm2(&r) <= 1e-15 * scale {
                break;
            }
            let delta = self.factor.solve(self.layout, &r);
            for (y, d) in dy.iter_mut().zip(&delta) {
                *y += d;
            }
            dir = self.complete(rc, dy.clone());
        }
        dir
    }

    /// ΔZ and ΔX for a given Δy.
    fn complete(&self, rc: &[DMatrix<T>], dy: Vec<f64>) -> Direction<T> {
        let aty = self.prep.apply_at(&dy);
        let dz: Vec<DMatrix<T>> = aty.iter().zip(self.rd).map(|(a, r)| a - r).collect();
        let dx = rc
            .iter()
            .zip(self.x)
            .zip(&dz)
            .zip(self.zinv)
            .map(|(((r, x), dz), zi)| herm(&(r - x * dz * zi)))
            .collect();
        Direction { dx, dy, dz }
    }
}

const REFINE_STEPS: usize = 2;
/// Iterations without a better iterate before a near-optimal solve stops.
const NO_PROGRESS_ITERS: usize = 8;

fn scaled_identity<T: Field>(n: usize, s: f64) -> DMatrix<T> {
    DMatrix::from_diagonal_element(n, n, T::from_real(s))
}

fn initial_point<T: Field>(prep: &Prepared<T>) -> (Vec<DMatrix<T>>, Vec<DMatrix<T>>) {
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for (j, &n) in prep.sizes.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 1.0;
        let mut eta: f64 = prep.c[j].norm();
        for c in &prep.per_block[j] {
            let na = c.sparse.frobenius_norm();
            xi = xi.max((1.0 + prep.b[c.con].abs()) / (1.0 + na));
            eta = eta.max(na);
        }
        xs.push(scaled_identity(n, xi.max(nf.sqrt())));
        zs.push(scaled_identity(n, (1.0 + eta).max(nf.sqrt())));
    }
    (xs, zs)
}

/// Solves `program` as a maximization to the tolerances in `opts`.
pub fn solve<T: Field + Debug>(
    program: &ConicProgram<T>,
    opts: &SolverOptions,
) -> Result<Solution<T>, SolveError<T>> {
    let start = Instant::now();
    let prep = Prepared::new(program, opts.feas_tol)?;
    let layout = SchurLayout::new(&prep);
    let m = prep.m();
    let nu = prep.nu();
    let norm_b = norm2(&prep.b);
    let norm_c = frob(&prep.c);

    let (mut x, mut z) = initial_point(&prep);
    let mut y = vec![0.0; m];

    let expand_y = |y: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; program.equalities.len()];
        for (k, &i) in prep.kept.iter().enumerate() {
            full[i] = y[k];
        }
        full
    };

    let mut best: Option<(f64, Solution<T>)> = None;
    let mut stalled = 0;
    let mut since_best = 0;
    let mut iter = 0;
    loop {
        let ax = prep.apply_a(&x);
        let rp: Vec<f64> = prep.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = prep.apply_at(&y);
        let rd: Vec<DMatrix<T>> = prep
            .c
            .iter()
            .zip(&aty)
            .zip(&z)
            .map(|((c, a), z)| c - a + z)
            .collect();
        let pobj = inner(&prep.c, &x);
        let dobj: f64 = prep.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let relp = norm2(&rp) / (1.0 + norm_b);
        let reld = frob(&rd) / (1.0 + norm_c);
        let compl = inner(&x, &z);
        let mu = compl / nu;
        let gap = dobj - pobj;

        let report = SolverReport {
            status: SolverStatus::Optimal,
            primal_value: pobj,
            dual_value: dobj,
            gap,
            iterations: iter,
            wall_time: start.elapsed().as_secs_f64(),
            primal_infeasibility: relp,
            dual_infeasibility: reld,
        };
        let merit = (relp / opts.feas_tol)
            .max(reld / opts.feas_tol)
            .max(gap.abs() / opts.gap_tol)
            .max(compl / opts.gap_tol);
        if best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((
                merit,
                Solution {
                    report: report.clone(),
                    x: x.clone(),
                    y: expand_y(&y),
                    z: z.clone(),
                },
            ));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if merit <= 1.0 {
            let (_, sol) = best.expect("just stored");
            return Ok(sol);
        }

        // dual ray: bᵀy → −∞ while A*(y) − Z stays bounded
        if dobj < -1e8 * (1.0 + norm_c) && reld < 1.0 {
            let scale = dobj.abs();
            let ray_residual = frob(&rd) / scale;
            return Err(SolveError::Infeasible {
                ray_objective: -1.0,
                ray_residual,
            });
        }
        if pobj > 1e8 * (1.0 + norm_b) && relp < 1.0 {
            return Err(SolveError::Unbounded { objective: pobj });
        }
        let best_merit = best.as_ref().map_or(f64::INFINITY, |(m, _)| *m);
        let no_progress = since_best >= NO_PROGRESS_ITERS && best_merit <= opts.near_factor;
        if iter >= opts.max_iter || stalled >= 3 || no_progress {
            break;
        }
        iter += 1;

        let Some(zinv) = z.iter().map(hermitian_inverse).collect::<Option<Vec<_>>>() else {
            break;
        };
        let Some(factor) = SchurFactor::new(assemble(&prep, &layout, &x, &zinv)) else {
            break;
        };
        let x_rd_zinv: Vec<DMatrix<T>> = x
            .iter()
            .zip(&rd)
            .zip(&zinv)
            .map(|((x, r), zi)| x * r * zi)
            .collect();
        let it = Iterate {
            prep: &prep,
            layout: &layout,
            factor: &factor,
            x: &x,
            zinv: &zinv,
            rd: &rd,
            rp: &rp,
            x_rd_zinv: &x_rd_zinv,
        };

        // predictor
        let rc: Vec<DMatrix<T>> = x.iter().map(|x| -x).collect();
        let pred = it.direction(&rc);
        let (Some(ap), Some(ad)) = (max_step_all(&x, &pred.dx), max_step_all(&z, &pred.dz)) else {
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff: Vec<DMatrix<T>> = x.iter().zip(&pred.dx).map(|(x, d)| x + d * T::from_real(ap)).collect();
        let z_aff: Vec<DMatrix<T>> = z.iter().zip(&pred.dz).map(|(z, d)| z + d * T::from_real(ad)).collect();
        let mu_aff = inner(&x_aff, &z_aff) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<DMatrix<T>> = x
            .iter()
            .zip(&zinv)
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|((x, zi), (dx, dz))| zi * T::from_real(sigma * mu) - x - dx * dz * zi)
            .collect();
        let dir = it.direction(&rc);
        let (Some(ap), Some(ad)) = (max_step_all(&x, &dir.dx), max_step_all(&z, &dir.dz)) else {
            break;
        };
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap.max(ad) < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        for (xj, d) in x.iter_mut().zip(&dir.dx) {
            *xj = herm(&(&*xj + d * T::from_real(ap)));
        }
        for (zj, d) in z.iter_mut().zip(&dir.dz) {
            *zj = herm(&(&*zj + d * T::from_real(ad)));
        }
        for (yi, d) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * d;
        }
    }

    let (merit, mut sol) = best.expect("at least one iterate evaluated");
    sol.report.wall_time = start.elapsed().as_secs_f64();
    sol.report.iterations = iter;
    if merit <= opts.near_factor {
        sol.report.status = SolverStatus::NearOptimal;
        Ok(sol)
    } else {
        sol.report.status = SolverStatus::NumericalFailure;
        Err(SolveError::NumericalFailure { best: Box::new(sol) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::program::{BlockSpec, LinearFunctional};
    use num_complex::Complex64;

    fn block(size: usize) -> BlockSpec {
        BlockSpec {
            label: String::new(),
            size,
        }
    }

    /// max tr(C X) s.t. tr X = 1 has value λ_max(C).
    #[test]
    fn top_eigenvalue_program() {
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, -1.0]);
        let mut p = ConicProgram::new(vec![block(3)]);
        p.objective.push(0, SparseHermitian::from_dense(&c));
        p.add_equality(LinearFunctional::new().with_term(0, SparseHermitian::identity(3)), 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        let top = c.symmetric_eigenvalues().max();
        assert_eq!(sol.report.status, SolverStatus::Optimal);
        assert!((sol.report.primal_value - top).abs() < 1e-6);
        assert!((sol.report.dual_value - top).abs() < 1e-6);
        assert!(sol.report.primal_value <= sol.report.dual_value + 1e-7);
    }

    #[test]
    fn complex_top_eigenvalue_program() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // Pauli-Y + 0.5·Z has eigenvalues ±√1.25
        let c = DMatrix::from_row_slice(2, 2, &[one * 0.5, -i, i, -one * 0.5]);
        let mut p = ConicProgram::new(vec![block(2)]);
        p.objective.push(0, SparseHermitian::from_dense(&c));
        p.add_equality(LinearFunctional::new().with_term(0, SparseHermitian::identity(2)), 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!((sol.report.primal_value - 1.25f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zero_objective_is_optimal_at_zero() {
        let mut p = ConicProgram::<f64>::new(vec![block(2), block(2)]);
        p.add_equality(
            LinearFunctional::new()
                .with_term(0, SparseHermitian::identity(2))
                .with_term(1, SparseHermitian::identity(2)),
            1.0,
        );
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.report.status, SolverStatus::Optimal);
        assert!(sol.report.primal_value.abs() < 1e-7);
    }

    #[test]
    fn detects_infeasible_trace() {
        // tr X = −1 with X ⪰ 0 has no solution
        let mut p = ConicProgram::<f64>::new(vec![block(2)]);
        p.objective.push(0, SparseHermitian::identity(2));
        p.add_equality(LinearFunctional::new().with_term(0, SparseHermitian::identity(2)), -1.0);
        let err = solve(&p, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible { .. }), "{err:?}");
    }

    #[test]
    fn empty_equality_with_nonzero_rhs() {
        let mut p = ConicProgram::<f64>::new(vec![block(1)]);
        p.add_equality(LinearFunctional::new(), 1.0);
        assert!(matches!(
            solve(&p, &SolverOptions::default()),
            Err(SolveError::EmptyEquality { index: 0, .. })
        ));
    }

    /// Many independent groups tied by one linking trace constraint exercise
    /// the bordered factorization; the answer is the largest top eigenvalue.
    #[test]
    fn arrow_layout_matches_dense_answer() {
        let nb = 12;
        let mut p = ConicProgram::<f64>::new((0..nb).map(|_| block(2)).collect());
        let mut total = LinearFunctional::new();
        let mut best: f64 = f64::NEG_INFINITY;
        for j in 0..nb {
            let c = DMatrix::from_row_slice(2, 2, &[j as f64 * 0.1, 0.3, 0.3, 1.0 - j as f64 * 0.05]);
            best = best.max(c.symmetric_eigenvalues().max());
            p.objective.push(j, SparseHermitian::from_dense(&c));
            total.push(j, SparseHermitian::identity(2));
            // pin the off-diagonal of every pair of blocks to agree
            if j % 2 == 1 {
                p.add_equality(
                    LinearFunctional::new()
                        .with_term(j, SparseHermitian::new(2, vec![(0, 1, 1.0), (1, 0, 1.0)]))
                        .with_term(j - 1, SparseHermitian::new(2, vec![(0, 1, -1.0), (1, 0, -1.0)])),
                    0.0,
                );
            }
        }
        p.add_equality(total, 1.0);
        for k in 0..nb / 2 {
            for (r, c) in [(0, 0), (1, 1)] {
                p.add_equality(
                    LinearFunctional::new()
                        .with_term(2 * k, SparseHermitian::new(2, vec![(r, c, 1.0)]))
                        .with_term(2 * k + 1, SparseHermitian::new(2, vec![(r, c, -1.0)])),
                    0.0,
                );
            }
        }
        let prep = Prepared::new(&p, 1e-7).unwrap();
        let layout = SchurLayout::new(&prep);
        assert!(layout.n_link >= 1 && layout.group_sizes.len() == nb / 2);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        // paired blocks are forced equal, so the value is the best mean pair
        let mut want = f64::NEG_INFINITY;
        for k in 0..nb / 2 {
            let a = |j: usize| DMatrix::from_row_slice(2, 2, &[j as f64 * 0.1, 0.3, 0.3, 1.0 - j as f64 * 0.05]);
            let sum = a(2 * k) + a(2 * k + 1);
            want = want.max(sum.symmetric_eigenvalues().max() / 2.0);
        }
        assert!(want <= best);
        assert!((sol.report.primal_value - want).abs() < 1e-6, "{} vs {want}", sol.report.primal_value);
    }
}
