//! Random inputs for property checks: Schmidt coefficients, Haar unitaries,
//! and pairs of sets that decompose a common operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::qmat::{dual_basis, Ket, DEFAULT_RANK_TOL};

use super::construct::SchmidtSpec;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform point of the probability simplex with every entry ≥ `floor`.
pub fn random_weights(d: usize, floor: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!(floor * (d as f64) < 1.0, "floor {floor} too large for {d} weights");
    loop {
        let raw: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let sum: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        if w.iter().all(|&x| x >= floor) {
            return w;
        }
    }
}

/// Random full-rank Schmidt coefficients, each at least `floor`.
pub fn random_schmidt(d: usize, floor: f64, rng: &mut impl Rng) -> SchmidtSpec {
    let mut w = random_weights(d, floor, rng);
    // absorb rounding so the sum passes the 1e-12 check exactly
    let sum: f64 = w.iter().sum();
    w[0] += 1.0 - sum;
    SchmidtSpec::new(w).expect("weights on the simplex")
}

/// Haar-distributed d×d unitary (QR of a complex Ginibre matrix with the
/// phases of R's diagonal moved into Q).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn random_ket(d: usize, rng: &mut impl Rng) -> Ket {
    Ket::new((0..d).map(|_| gaussian(rng)).collect())
        .expect("nonempty")
        .normalized()
}

/// Two linearly independent unit-ket sets with Σ_a q_a|φ_a⟩⟨φ_a| =
/// Σ_i λ_i|λ_i⟩⟨λ_i|, together with the generating weights.
#[derive(Debug, Clone)]
pub struct CoDecomposablePair {
    pub set_a: Vec<Ket>,
    pub set_b: Vec<Ket>,
    pub q: Vec<f64>,
    pub lam: Vec<f64>,
}

/// Draws set A and weights q at random, then mixes the vectors √q_a|φ_a⟩
/// with a Haar unitary to obtain set B. Draws are repeated until every
/// cross-expansion coefficient has modulus at least `min_coeff` and both
/// sets have condition number below 1e4.
pub fn random_co_decomposable(d: usize, min_coeff: f64, rng: &mut impl Rng) -> CoDecomposablePair {
    loop {
        let set_a: Vec<Ket> = (0..d).map(|_| random_ket(d, rng)).collect();
        let q = random_weights(d, 1e-3, rng);
        let w = random_unitary(d, rng);
        let mut set_b = Vec::with_capacity(d);
        let mut lam = Vec::with_capacity(d);
        for i in 0..d {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            for (a, phi) in set_a.iter().enumerate() {
                let c = w[(i, a)] * q[a].sqrt();
                for (vk, pk) in v.iter_mut().zip(phi.amplitudes()) {
                    *vk += c * pk;
                }
            }
            let ket = Ket::new(v).expect("nonempty");
            lam.push(ket.norm_squared());
            set_b.push(ket.normalized());
        }
        let (Ok(pa), Ok(pb)) = (dual_basis(&set_a, DEFAULT_RANK_TOL), dual_basis(&set_b, DEFAULT_RANK_TOL)) else {
            continue;
        };
        if pa.condition_number > 1e4 || pb.condition_number > 1e4 {
            continue;
        }
        let smallest = (0..d)
            .flat_map(|i| (0..d).map(move |a| (i, a)))
            .map(|(i, a)| pb.dual[i].inner(&set_a[a]).norm().min(pa.dual[a].inner(&set_b[i]).norm()))
            .fold(f64::INFINITY, f64::min);
        if smallest >= min_coeff {
            return CoDecomposablePair { set_a, set_b, q, lam };
        }
    }
}
