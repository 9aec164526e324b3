mod common;

use common::{born, projector_amplitude, random_instance};
use proptest::prelude::*;
use qndlab::protocol::{all_indices, delta_of};
use qndlab::qpd::{
    conjugate_partner, kirkwood_dirac, marginal_final, marginal_initial, marginal_intermediate, quantum_partial_sums,
};
use qndlab::random::{random_commuting_unitary, random_diagonal_state, random_observable, rng_from_seed};
use qndlab::tolerance::GROUPING_TOL;
use qndlab::{build_qpd, enumerate_amplitudes, PathKind, ProtocolInstance, TimePair};

fn seeds() -> impl Iterator<Item = (usize, u64)> {
    (0..200u64).map(|s| (2 + (s % 2) as usize, 1000 + s))
}

#[test]
fn enumeration_matches_projector_products() {
    for (dim, seed) in seeds().take(40) {
        let inst = random_instance(dim, seed);
        let amps = enumerate_amplitudes(&inst).unwrap();
        assert_eq!(amps.len(), dim.pow(5));
        for p in amps.iter() {
            assert!((p.value - projector_amplitude(&inst, p.indices)).norm() < 1e-12);
            assert_eq!(p.delta, delta_of(inst.observable().eigenvalues(), p.indices));
        }
    }
}

#[test]
fn normalization_split() {
    for (dim, seed) in seeds() {
        let qpd = build_qpd(&enumerate_amplitudes(&random_instance(dim, seed)).unwrap(), GROUPING_TOL).unwrap();
        let classical: f64 = qpd.classical_part().unwrap().iter().map(|b| b.weight).sum();
        let quantum: f64 = qpd.quantum_part().unwrap().iter().map(|b| b.weight).sum();
        assert!((classical - 1.0).abs() <= 1e-10, "dim {dim} seed {seed}: {classical}");
        assert!(quantum.abs() <= 1e-10, "dim {dim} seed {seed}: {quantum}");
        assert!(qpd.imag_residue() <= 1e-12);
    }
}

#[test]
fn quantum_partial_sums_vanish() {
    for (dim, seed) in seeds() {
        let (first, second) = quantum_partial_sums(&enumerate_amplitudes(&random_instance(dim, seed)).unwrap());
        assert!(first.norm() <= 1e-10 && second.norm() <= 1e-10);
    }
}

#[test]
fn nsit_marginals_equal_born_probabilities() {
    for (dim, seed) in seeds() {
        let inst = random_instance(dim, seed);
        let obs = inst.observable();
        let amps = enumerate_amplitudes(&inst).unwrap();
        let u1 = inst.u1().matrix();
        let u = inst.u2().matrix() * u1;
        let rho = inst.rho0().matrix();
        let checks = [
            (marginal_initial(&amps), born(obs, rho)),
            (marginal_intermediate(&amps), born(obs, &(u1 * rho * u1.adjoint()))),
            (marginal_final(&amps), born(obs, &(&u * rho * u.adjoint()))),
        ];
        for (marginal, expected) in checks {
            assert_eq!(marginal.len(), dim);
            for ((a, p), (r, q)) in marginal.iter().zip(expected.iter().enumerate()) {
                assert_eq!(*a, obs.eigenvalues()[r]);
                assert!((p - q).abs() <= 1e-10, "dim {dim} seed {seed}: {p} vs {q}");
            }
        }
    }
}

#[test]
fn classical_paths_factorize_into_transition_probabilities() {
    for (dim, seed) in seeds().take(60) {
        let inst = random_instance(dim, seed);
        let v = inst.observable().eigenvectors();
        let u1 = v.adjoint() * inst.u1().matrix() * v;
        let u2 = v.adjoint() * inst.u2().matrix() * v;
        let rho = v.adjoint() * inst.rho0().matrix() * v;
        let amps = enumerate_amplitudes(&inst).unwrap();
        for p in amps.iter().filter(|p| p.kind == PathKind::Classical) {
            let [k, j, _, i, _] = p.indices;
            let markov = rho[(i, i)].re * u1[(j, i)].norm_sqr() * u2[(k, j)].norm_sqr();
            assert!((p.value.re - markov).abs() < 1e-12 && p.value.im.abs() < 1e-12);
        }
    }
}

#[test]
fn coherence_free_instances_have_no_negativity() {
    for seed in 0..50u64 {
        let mut rng = rng_from_seed(77 + seed);
        let dim = 2 + (seed % 3) as usize;
        let obs = random_observable(dim, &mut rng);
        let rho = random_diagonal_state(&obs, &mut rng);
        let u1 = random_commuting_unitary(&obs, &mut rng);
        let u2 = random_commuting_unitary(&obs, &mut rng);
        let inst = ProtocolInstance::new(rho, u1, u2, obs).unwrap();
        let qpd = build_qpd(&enumerate_amplitudes(&inst).unwrap(), GROUPING_TOL).unwrap();
        assert!(qpd.negativity() <= 1e-12, "seed {seed}: {}", qpd.negativity());
        assert!(qpd.quantum_part().unwrap().iter().all(|b| b.weight.abs() <= 1e-12));
    }
}

#[test]
fn negativity_requires_a_nonzero_quantum_part() {
    for (dim, seed) in seeds() {
        let qpd = build_qpd(&enumerate_amplitudes(&random_instance(dim, seed)).unwrap(), GROUPING_TOL).unwrap();
        if qpd.negativity() > 1e-10 {
            assert!(qpd.quantum_part().unwrap().iter().any(|b| b.weight.abs() > 1e-12));
        }
    }
}

#[test]
fn kirkwood_dirac_marginals() {
    for (dim, seed) in seeds().take(50) {
        let inst = random_instance(dim, seed);
        let obs = inst.observable();
        let amps = enumerate_amplitudes(&inst).unwrap();
        let u1 = inst.u1().matrix();
        let u = inst.u2().matrix() * u1;
        let rho = inst.rho0().matrix();
        let t1 = born(obs, &(u1 * rho * u1.adjoint()));
        let t2 = born(obs, &(&u * rho * u.adjoint()));
        let t0 = born(obs, rho);
        for pair in TimePair::ALL {
            let kd = kirkwood_dirac(&amps, pair);
            assert!((kd.total() - qndlab::linalg::c64(1.0, 0.0)).norm() < 1e-10);
            let later = match pair {
                TimePair::T01 => &t1,
                _ => &t2,
            };
            for (got, want) in kd.later_marginal().iter().zip(later) {
                assert!((got.re - want).abs() < 1e-10 && got.im.abs() < 1e-10);
            }
            if pair != TimePair::T12 {
                for (got, want) in kd.earlier_marginal().iter().zip(&t0) {
                    assert!((got.re - want).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn rabi_support_values() {
    let qpd = build_qpd(&enumerate_amplitudes(&ProtocolInstance::rabi_example(0.8).unwrap()).unwrap(), GROUPING_TOL).unwrap();
    let support: Vec<f64> = qpd.support().iter().map(|b| b.delta).collect();
    assert_eq!(support, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    for b in qpd.classical_part().unwrap() {
        if (b.delta as i64) % 2 == 0 {
            assert_eq!(b.weight, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conjugate_pairs(seed in any::<u64>(), dim in 2usize..4) {
        let amps = enumerate_amplitudes(&random_instance(dim, seed)).unwrap();
        for idx in all_indices(dim) {
            let partner = conjugate_partner(idx);
            prop_assert!((amps.value(idx) - amps.value(partner).conj()).norm() <= 1e-12);
            prop_assert!((amps.get(idx).delta - amps.get(partner).delta).abs() <= 1e-12);
        }
    }

    #[test]
    fn total_weight_is_one_and_real(seed in any::<u64>(), dim in 2usize..5) {
        let qpd = build_qpd(&enumerate_amplitudes(&random_instance(dim, seed)).unwrap(), GROUPING_TOL).unwrap();
        prop_assert!((qpd.total_weight() - 1.0).abs() <= 1e-10);
        prop_assert!(qpd.imag_residue() <= 1e-10);
        prop_assert!(qpd.support().windows(2).all(|w| w[0].delta < w[1].delta));
    }
}
