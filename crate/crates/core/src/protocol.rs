//! Three-time non-demolition protocol: instances and the five-index path
//! amplitudes `P(k, j, m, i, l)`.
//!
//! Index roles: `i`, `l` label the outcomes at t0 (ket and bra side), `j`, `m`
//! those at t1, and `k` the final outcome at t2. All indices refer to the
//! eigenbasis of the measured observable, in ascending eigenvalue order.

use crate::error::{Error, Result};
use crate::linalg::{c64, pauli_x, pure_state, CMatrix, DensityOperator, Dynamics, Observable, Schedule, UnitarySegment, C64};
use crate::sum::csum;
use crate::tolerance::DEFAULT_AMPLITUDE_CAP;

/// `(k, j, m, i, l)`.
pub type PathIndex = [usize; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolInstance {
    rho0: DensityOperator,
    u1: UnitarySegment,
    u2: UnitarySegment,
    observable: Observable,
    schedule: Option<Schedule>,
}

impl ProtocolInstance {
    pub fn new(
        rho0: DensityOperator,
        u1: UnitarySegment,
        u2: UnitarySegment,
        observable: Observable,
    ) -> Result<Self> {
        let dim = observable.dim();
        for found in [rho0.dim(), u1.dim(), u2.dim()] {
            if found != dim {
                return Err(Error::DimensionMismatch { expected: dim, found });
            }
        }
        Ok(Self { rho0, u1, u2, observable, schedule: None })
    }

    pub fn from_schedule(rho0: DensityOperator, observable: Observable, schedule: Schedule) -> Result<Self> {
        let (u1, u2) = schedule.segments()?;
        let mut inst = Self::new(rho0, u1, u2, observable)?;
        inst.schedule = Some(schedule);
        Ok(inst)
    }

    /// Two-level example: `|ψ0⟩ = (|↑⟩ + i|↓⟩)/√2`, `H = ω σ_x / 2` with
    /// ω = 1, `A = σ_z`, measured at 0, τ and 2τ where τ = `omega_tau`.
    pub fn rabi_example(omega_tau: f64) -> Result<Self> {
        let rho0 = pure_state(&[c64(1.0, 0.0), c64(0.0, 1.0)])?;
        let h = pauli_x() * c64(0.5, 0.0);
        let schedule = Schedule::new(0.0, omega_tau, 2.0 * omega_tau, Dynamics::Generator(h))?;
        let observable = crate::linalg::eigendecompose_hermitian(&crate::linalg::pauli_z())?;
        Self::from_schedule(rho0, observable, schedule)
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    pub fn rho0(&self) -> &DensityOperator {
        &self.rho0
    }

    pub fn u1(&self) -> &UnitarySegment {
        &self.u1
    }

    pub fn u2(&self) -> &UnitarySegment {
        &self.u2
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    /// Replace the observable, keeping its eigenvectors (used after snapping
    /// a binary spectrum).
    pub(crate) fn with_observable(&self, observable: Observable) -> Self {
        Self { observable, ..self.clone() }
    }

    /// `U = U2 · U1`.
    pub fn total_unitary(&self) -> CMatrix {
        self.u2.matrix() * self.u1.matrix()
    }

    /// Density operator after the first segment, `U1 ρ0 U1†`.
    pub fn rho_at_t1(&self) -> CMatrix {
        let u = self.u1.matrix();
        u * self.rho0.matrix() * u.adjoint()
    }

    /// Density operator at t2, `U ρ0 U†`.
    pub fn rho_at_t2(&self) -> CMatrix {
        let u = self.total_unitary();
        &u * self.rho0.matrix() * u.adjoint()
    }
}

/// Eigenvalue combination `a_k + (a_j + a_m + a_i + a_l)/2`.
pub fn delta_of(eigenvalues: &[f64], [k, j, m, i, l]: PathIndex) -> f64 {
    eigenvalues[k] + (eigenvalues[j] + eigenvalues[m] + eigenvalues[i] + eigenvalues[l]) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// `m = j` and `l = i`: a definite outcome at every time.
    Classical,
    Quantum,
}

impl PathKind {
    pub fn of([_, j, m, i, l]: PathIndex) -> Self {
        if m == j && l == i {
            PathKind::Classical
        } else {
            PathKind::Quantum
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Classical => "classical",
            PathKind::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitude {
    pub indices: PathIndex,
    pub value: C64,
    pub delta: f64,
    pub kind: PathKind,
}

/// The complete `dim⁵` table of path amplitudes, stored in row-major order
/// of `(k, j, m, i, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet {
    dim: usize,
    eigenvalues: Vec<f64>,
    amplitudes: Vec<PathAmplitude>,
}

impl AmplitudeSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PathAmplitude> {
        self.amplitudes.iter()
    }

    pub fn as_slice(&self) -> &[PathAmplitude] {
        &self.amplitudes
    }

    fn flat_index(&self, [k, j, m, i, l]: PathIndex) -> usize {
        let d = self.dim;
        (((k * d + j) * d + m) * d + i) * d + l
    }

    pub fn get(&self, indices: PathIndex) -> &PathAmplitude {
        &self.amplitudes[self.flat_index(indices)]
    }

    pub fn value(&self, indices: PathIndex) -> C64 {
        self.get(indices).value
    }

    /// Overwrite one amplitude. Only meant for fault-injection tests; it
    /// breaks the table's symmetries on purpose.
    pub fn set_value(&mut self, indices: PathIndex, value: C64) {
        let idx = self.flat_index(indices);
        self.amplitudes[idx].value = value;
    }

    /// Relabel the spectrum (same length), recomputing every Δ.
    pub(crate) fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|a| PathAmplitude { delta: delta_of(&eigenvalues, a.indices), ..*a })
            .collect();
        Self { dim: self.dim, eigenvalues, amplitudes }
    }

    /// Compensated sum of all amplitudes.
    pub fn total(&self) -> C64 {
        csum(self.amplitudes.iter().map(|a| a.value))
    }

    /// Compensated sum over the tuples accepted by `filter`.
    pub fn sum_where<F: Fn(PathIndex) -> bool>(&self, filter: F) -> C64 {
        csum(self.amplitudes.iter().filter(|a| filter(a.indices)).map(|a| a.value))
    }
}

pub fn all_indices(dim: usize) -> impl Iterator<Item = PathIndex> {
    let total = dim.pow(5);
    (0..total).map(move |mut n| {
        let mut idx = [0usize; 5];
        for slot in idx.iter_mut().rev() {
            *slot = n % dim;
            n /= dim;
        }
        idx
    })
}

fn check_indices(dim: usize, indices: PathIndex) -> Result<()> {
    if indices.iter().any(|&r| r >= dim) {
        return Err(Error::IndexOutOfRange { indices, dim });
    }
    Ok(())
}

/// `Tr[Π_k U2 Π_j U1 Π_i ρ0 Π_l U1† Π_m U2†]` by explicit matrix products.
///
/// This is the slow route; [`enumerate_amplitudes`] uses the factorized
/// matrix elements instead.
pub fn path_amplitude(inst: &ProtocolInstance, indices: PathIndex) -> Result<C64> {
    check_indices(inst.dim(), indices)?;
    let [k, j, m, i, l] = indices;
    let p = |r: usize| inst.observable().projector(r);
    let u1 = inst.u1().matrix();
    let u2 = inst.u2().matrix();
    let product = p(k) * u2 * p(j) * u1 * p(i) * inst.rho0().matrix() * p(l) * u1.adjoint() * p(m) * u2.adjoint();
    Ok(product.trace())
}

pub fn enumerate_amplitudes(inst: &ProtocolInstance) -> Result<AmplitudeSet> {
    enumerate_amplitudes_capped(inst, DEFAULT_AMPLITUDE_CAP)
}

/// Every amplitude `U2_kj U1_ji ρ_il (U1†)_lm (U2†)_mk`, with matrix
/// elements taken in the observable eigenbasis.
pub fn enumerate_amplitudes_capped(inst: &ProtocolInstance, cap: usize) -> Result<AmplitudeSet> {
    let d = inst.dim();
    let tuples = d.checked_pow(5).unwrap_or(usize::MAX);
    if tuples > cap {
        return Err(Error::InstanceTooLarge { tuples, cap });
    }
    let obs = inst.observable();
    let u1 = obs.to_eigenbasis(inst.u1().matrix());
    let u2 = obs.to_eigenbasis(inst.u2().matrix());
    let rho = obs.to_eigenbasis(inst.rho0().matrix());

    // forward[k][j][i] = U2_kj U1_ji; the bra side is its conjugate.
    let forward: Vec<C64> = (0..d * d * d)
        .map(|n| {
            let (k, j, i) = (n / (d * d), (n / d) % d, n % d);
            u2[(k, j)] * u1[(j, i)]
        })
        .collect();
    let fw = |k: usize, j: usize, i: usize| forward[(k * d + j) * d + i];

    let eigenvalues = obs.eigenvalues().to_vec();
    let amplitudes = all_indices(d)
        .map(|indices| {
            let [k, j, m, i, l] = indices;
            let value = fw(k, j, i) * rho[(i, l)] * fw(k, m, l).conj();
            PathAmplitude { indices, value, delta: delta_of(&eigenvalues, indices), kind: PathKind::of(indices) }
        })
        .collect();
    Ok(AmplitudeSet { dim: d, eigenvalues, amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigendecompose_hermitian, pauli_z};
    use crate::random::{haar_unitary_from, random_observable, random_pure_state, rng_from_seed};

    fn trivial_instance() -> ProtocolInstance {
        let rho = pure_state(&[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        // |0⟩ in the σ_z eigenbasis is the eigenvalue −1 state |↓⟩.
        let obs = eigendecompose_hermitian(&(-pauli_z())).unwrap();
        ProtocolInstance::new(rho, UnitarySegment::identity(2), UnitarySegment::identity(2), obs).unwrap()
    }

    /// Scalar product formula written out independently of the enumeration.
    fn elementwise(inst: &ProtocolInstance, [k, j, m, i, l]: PathIndex) -> C64 {
        let v = inst.observable().eigenvectors();
        let me = |a: &CMatrix, r: usize, s: usize| (v.column(r).adjoint() * a * v.column(s))[(0, 0)];
        let (u1, u2, rho) = (inst.u1().matrix(), inst.u2().matrix(), inst.rho0().matrix());
        me(u2, k, j) * me(u1, j, i) * me(rho, i, l) * me(&u1.adjoint(), l, m) * me(&u2.adjoint(), m, k)
    }

    #[test]
    fn identity_dynamics_amplitudes() {
        let inst = trivial_instance();
        assert!((path_amplitude(&inst, [0, 0, 0, 0, 0]).unwrap() - c64(1.0, 0.0)).norm() < 1e-15);
        assert!(path_amplitude(&inst, [0, 0, 0, 0, 1]).unwrap().norm() < 1e-15);
        let amps = enumerate_amplitudes(&inst).unwrap();
        assert!((amps.value([0, 0, 0, 0, 0]) - c64(1.0, 0.0)).norm() < 1e-15);
        assert!(amps.value([0, 0, 0, 0, 1]).norm() < 1e-15);
    }

    #[test]
    fn trace_route_matches_elementwise_on_rabi_example() {
        let inst = ProtocolInstance::rabi_example(std::f64::consts::FRAC_PI_2).unwrap();
        let amps = enumerate_amplitudes(&inst).unwrap();
        let mut checked = 0;
        for idx in all_indices(2).filter(|&[_, j, m, _, _]| m != j) {
            let oracle = elementwise(&inst, idx);
            assert!((path_amplitude(&inst, idx).unwrap() - oracle).norm() < 1e-14);
            assert!((amps.value(idx) - oracle).norm() < 1e-14);
            checked += 1;
        }
        assert_eq!(checked, 16);
    }

    #[test]
    fn counts_by_kind() {
        for (d, classical) in [(2usize, 8usize), (3, 27)] {
            let mut rng = rng_from_seed(d as u64);
            let obs = random_observable(d, &mut rng);
            let rho = random_pure_state(d, &mut rng);
            let u1 = UnitarySegment::new(haar_unitary_from(d, &mut rng)).unwrap();
            let u2 = UnitarySegment::new(haar_unitary_from(d, &mut rng)).unwrap();
            let inst = ProtocolInstance::new(rho, u1, u2, obs).unwrap();
            let amps = enumerate_amplitudes(&inst).unwrap();
            assert_eq!(amps.len(), d.pow(5));
            assert_eq!(amps.iter().filter(|a| a.kind == PathKind::Classical).count(), classical);
            assert!((amps.total() - c64(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn index_out_of_range() {
        let inst = trivial_instance();
        assert!(matches!(path_amplitude(&inst, [0, 0, 2, 0, 0]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let inst = trivial_instance();
        assert!(matches!(enumerate_amplitudes_capped(&inst, 31), Err(Error::InstanceTooLarge { tuples: 32, cap: 31 })));
        assert!(enumerate_amplitudes_capped(&inst, 32).is_ok());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let rho = pure_state(&[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]).unwrap();
        let obs = eigendecompose_hermitian(&pauli_z()).unwrap();
        let err = ProtocolInstance::new(rho, UnitarySegment::identity(2), UnitarySegment::identity(2), obs);
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, found: 3 })));
    }

    #[test]
    fn delta_formula() {
        let a = [-1.0, 1.0];
        assert_eq!(delta_of(&a, [1, 1, 1, 1, 0]), 2.0);
        assert_eq!(delta_of(&a, [1, 1, 0, 0, 0]), 0.0);
        assert_eq!(delta_of(&a, [0, 0, 0, 0, 0]), -3.0);
    }
}
