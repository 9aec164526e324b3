#![allow(dead_code)]

use qndlab::linalg::{c64, CMatrix, C64};
use qndlab::random::{haar_unitary_from, random_mixed_state, random_observable, random_pure_state, rng_from_seed};
use qndlab::{Observable, ProtocolInstance, UnitarySegment};
use rand::Rng;

pub fn random_instance(dim: usize, seed: u64) -> ProtocolInstance {
    let mut rng = rng_from_seed(seed);
    let obs = random_observable(dim, &mut rng);
    random_instance_for(obs, seed.wrapping_add(0x9e37_79b9))
}

pub fn random_instance_for(obs: Observable, seed: u64) -> ProtocolInstance {
    let mut rng = rng_from_seed(seed);
    let dim = obs.dim();
    let rho = if rng.random_bool(0.5) { random_pure_state(dim, &mut rng) } else { random_mixed_state(dim, &mut rng) };
    let u1 = UnitarySegment::new(haar_unitary_from(dim, &mut rng)).unwrap();
    let u2 = UnitarySegment::new(haar_unitary_from(dim, &mut rng)).unwrap();
    ProtocolInstance::new(rho, u1, u2, obs).unwrap()
}

pub fn binary_instance(seed: u64) -> ProtocolInstance {
    let mut rng = rng_from_seed(seed);
    let obs = qndlab::random::random_binary_observable(&mut rng);
    random_instance_for(obs, seed ^ 0x5151)
}

/// Brute-force path amplitude from explicit projector products:
/// `Tr[Π_k U2 Π_j U1 Π_i ρ Π_l U1† Π_m U2†]`.
pub fn projector_amplitude(inst: &ProtocolInstance, [k, j, m, i, l]: [usize; 5]) -> C64 {
    let p = inst.observable().projectors();
    let u1 = inst.u1().matrix();
    let u2 = inst.u2().matrix();
    let rho = inst.rho0().matrix();
    let chain = &p[k] * u2 * &p[j] * u1 * &p[i] * rho * &p[l] * u1.adjoint() * &p[m] * u2.adjoint();
    chain.trace()
}

/// Diagonal of `V† X V` for the observable's eigenbasis, i.e. Born probabilities.
pub fn born(obs: &Observable, state: &CMatrix) -> Vec<f64> {
    (0..obs.dim()).map(|r| (obs.projector(r) * state).trace().re).collect()
}

pub fn heisenberg(inst: &ProtocolInstance, time: usize) -> CMatrix {
    let a = inst.observable().matrix();
    match time {
        0 => a.clone(),
        1 => inst.u1().matrix().adjoint() * a * inst.u1().matrix(),
        _ => {
            let u = inst.u2().matrix() * inst.u1().matrix();
            u.adjoint() * a * u
        }
    }
}

pub fn symmetrized_correlator(inst: &ProtocolInstance, s: usize, t: usize) -> f64 {
    let a = heisenberg(inst, s);
    let b = heisenberg(inst, t);
    (((&a * &b + &b * &a) * inst.rho0().matrix()).trace() * c64(0.5, 0.0)).re
}
