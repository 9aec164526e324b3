//! Seeded random instances for property tests: Haar unitaries, Hermitian
//! matrices, states and complete protocol instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::protocol::ProtocolInstance;
use crate::linalg::{
    c64, eigendecompose_hermitian, pauli_z, pure_state, CMatrix, CVector, DensityOperator,
    Observable, UnitarySegment, C64,
};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: Gram-Schmidt on a Ginibre matrix. The implied R
/// factor has a real positive diagonal, which is the phase fixing that makes
/// the distribution exactly Haar.
pub fn haar_unitary_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rng);
    let mut q: Vec<CVector> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v: CVector = g.column(c).into_owned();
        // Two passes keep the columns orthonormal to machine precision.
        for _ in 0..2 {
            for u in &q {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        q.push(v / c64(norm, 0.0));
    }
    CMatrix::from_columns(&q)
}

pub fn haar_random_unitary(dim: usize, seed: u64) -> UnitarySegment {
    assert!(dim >= 2, "haar_random_unitary needs dim ≥ 2");
    let mut rng = rng_from_seed(seed);
    UnitarySegment::new(haar_unitary_from(dim, &mut rng)).expect("Gram-Schmidt output is unitary")
}

/// Hermitian matrix `(G + G†)/2` from a Ginibre matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    pure_state(&v).expect("Gaussian vector is nonzero")
}

/// Full-rank mixed state `G G† / Tr(G G†)`.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(dim, rng);
    let w = &g * g.adjoint();
    let trace = w.trace();
    let m = w / trace;
    DensityOperator::new((&m + m.adjoint()) * c64(0.5, 0.0)).expect("Wishart matrix is a valid state")
}

/// Binary observable `V σ_z V†` with a Haar-random frame `V`.
pub fn random_binary_observable<R: Rng + ?Sized>(rng: &mut R) -> Observable {
    let v = haar_unitary_from(2, rng);
    let a = &v * pauli_z() * v.adjoint();
    let a = (&a + a.adjoint()) * c64(0.5, 0.0);
    eigendecompose_hermitian(&a).expect("conjugated Pauli matrix is Hermitian")
}

pub fn random_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    eigendecompose_hermitian(&random_hermitian(dim, rng)).expect("symmetrized matrix is Hermitian")
}

/// Diagonal unitary in the eigenbasis of `obs`, hence commuting with it.
pub fn random_commuting_unitary<R: Rng + ?Sized>(obs: &Observable, rng: &mut R) -> UnitarySegment {
    let v = obs.eigenvectors();
    let phases = CVector::from_fn(obs.dim(), |_, _| {
        C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    });
    let u = v * CMatrix::from_diagonal(&phases) * v.adjoint();
    UnitarySegment::new(u).expect("diagonal phases are unitary")
}

/// Mixed state diagonal in the eigenbasis of `obs`, with random populations.
pub fn random_diagonal_state<R: Rng + ?Sized>(obs: &Observable, rng: &mut R) -> DensityOperator {
    let weights: Vec<f64> = (0..obs.dim()).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let n = obs.dim();
    let m = obs
        .projectors()
        .iter()
        .zip(&weights)
        .fold(CMatrix::zeros(n, n), |acc, (p, w)| acc + p * c64(w / total, 0.0));
    DensityOperator::new((&m + m.adjoint()) * c64(0.5, 0.0)).expect("convex mixture of projectors")
}

/// Protocol instance on `obs` with Haar-random `U1`, `U2` and an initial
/// state that is pure or mixed with equal odds.
pub fn random_instance<R: Rng + ?Sized>(obs: &Observable, rng: &mut R) -> ProtocolInstance {
    let dim = obs.dim();
    let rho = if rng.random_bool(0.5) { random_pure_state(dim, rng) } else { random_mixed_state(dim, rng) };
    let u1 = UnitarySegment::new(haar_unitary_from(dim, rng)).expect("Haar sample is unitary");
    let u2 = UnitarySegment::new(haar_unitary_from(dim, rng)).expect("Haar sample is unitary");
    ProtocolInstance::new(rho, u1, u2, obs.clone()).expect("dimensions agree by construction")
}
