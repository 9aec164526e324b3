//! Joint system-plus-detector simulation of the non-demolition protocol.
//!
//! A two-level detector with momentum eigenvalues ±1 starts in the equal
//! superposition. Each of the three couplings `exp(i λ/2 A ⊗ p)` imprints a
//! phase; the normalized off-diagonal element `⟨+1| · |−1⟩` of the final
//! detector state is the quasi-characteristic function `G_λ`, whose inverse
//! Fourier transform is the quasi-probability distribution over Δ.
//!
//! Nothing here uses the path amplitudes, so it serves as an independent
//! check on [`crate::protocol`].

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, CMatrix, CVector, Observable, C64};
use crate::protocol::{AmplitudeSet, ProtocolInstance};
use crate::qpd::{QpdBin, QuasiDistribution};
use crate::sum::{csum, ComplexSum};

/// Largest residual of `G_λ` tolerated after inversion.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

const GRID_TOL: f64 = 1e-9;
const LATTICE_TOL: f64 = 1e-9;
const MAX_SUBDIVISION: usize = 1000;
const MAX_LATTICE_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    p_values: [f64; 2],
    initial_state: [C64; 2],
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::qubit()
    }
}

impl DetectorModel {
    /// `p = (+1, −1)`, initial state `(|+1⟩ + |−1⟩)/√2`.
    pub fn qubit() -> Self {
        let amp = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { p_values: [1.0, -1.0], initial_state: [amp, amp] }
    }

    pub fn levels(&self) -> usize {
        self.p_values.len()
    }

    pub fn p_values(&self) -> [f64; 2] {
        self.p_values
    }

    pub fn p_operator(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(2, self.p_values.iter().map(|&p| c64(p, 0.0))))
    }

    pub fn initial_vector(&self) -> CVector {
        CVector::from_column_slice(&self.initial_state)
    }

    pub fn initial_density(&self) -> CMatrix {
        let v = self.initial_vector();
        &v * v.adjoint()
    }

    /// `⟨+p| r⁰ |−p⟩`.
    pub fn initial_coherence(&self) -> C64 {
        self.initial_state[0] * self.initial_state[1].conj()
    }
}

/// `exp(i (λ/2) A ⊗ p)`, assembled from the diagonal phases
/// `e^{i (λ/2) a_r p}` in the joint eigenbasis.
pub fn coupling_unitary(obs: &Observable, lambda: f64, det: &DetectorModel) -> CMatrix {
    let v = kron(obs.eigenvectors(), &CMatrix::identity(det.levels(), det.levels()));
    let phases = CVector::from_iterator(
        obs.dim() * det.levels(),
        obs.eigenvalues()
            .iter()
            .flat_map(|&a| det.p_values().map(move |p| C64::from_polar(1.0, 0.5 * lambda * a * p))),
    );
    &v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// `u2 (U2 ⊗ 𝕀) u1 (U1 ⊗ 𝕀) u0` on the joint space.
pub fn total_evolution(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> CMatrix {
    let id = CMatrix::identity(det.levels(), det.levels());
    let u = coupling_unitary(inst.observable(), lambda, det);
    let u1 = kron(inst.u1().matrix(), &id);
    let u2 = kron(inst.u2().matrix(), &id);
    &u * u2 * &u * u1 * &u
}

/// Partial trace over the system of the `(+p, −p)` detector element.
fn detector_coherence(joint: &CMatrix, sys_dim: usize, levels: usize) -> C64 {
    csum((0..sys_dim).map(|s| joint[(s * levels, s * levels + 1)]))
}

/// Reduced system state after the joint evolution.
pub fn reduced_system_state(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> CMatrix {
    let d = inst.dim();
    let m = det.levels();
    let r = evolve_joint_density(inst, det, lambda);
    CMatrix::from_fn(d, d, |a, b| csum((0..m).map(|p| r[(a * m + p, b * m + p)])))
}

fn evolve_joint_density(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> CMatrix {
    let u = total_evolution(inst, det, lambda);
    let joint = kron(inst.rho0().matrix(), &det.initial_density());
    &u * joint * u.adjoint()
}

/// A state vector `ψ` with `ψψ† = ρ` for a rank-1 `ρ`.
fn purification(rho: &CMatrix) -> CVector {
    let (col, _) = (0..rho.ncols())
        .map(|c| (c, rho[(c, c)].re))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty matrix");
    let v: CVector = rho.column(col).into_owned();
    let norm = v.norm();
    v / c64(norm, 0.0)
}

/// `G_λ` from the joint evolution. Pure initial states are propagated as
/// vectors (`R = |Ψ⟩⟨Ψ|`); mixed ones as the joint density operator.
pub fn run_protocol(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> Result<C64> {
    let d = inst.dim();
    let m = det.levels();
    let norm = det.initial_coherence();
    if inst.observable().dim() != d || inst.rho0().dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: inst.rho0().dim() });
    }
    if inst.rho0().is_pure(1e-12) {
        let psi = kron(
            &CMatrix::from_column_slice(d, 1, purification(inst.rho0().matrix()).as_slice()),
            &CMatrix::from_column_slice(m, 1, det.initial_vector().as_slice()),
        );
        let out = total_evolution(inst, det, lambda) * psi;
        Ok(csum((0..d).map(|s| out[(s * m, 0)] * out[(s * m + 1, 0)].conj())) / norm)
    } else {
        Ok(run_protocol_mixed(inst, det, lambda) / norm)
    }
}

/// Unnormalized coherence from the density-operator route (any input state).
fn run_protocol_mixed(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> C64 {
    detector_coherence(&evolve_joint_density(inst, det, lambda), inst.dim(), det.levels())
}

/// `G_λ` from the density-operator route regardless of purity.
pub fn run_protocol_density(inst: &ProtocolInstance, det: &DetectorModel, lambda: f64) -> C64 {
    run_protocol_mixed(inst, det, lambda) / det.initial_coherence()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSamples {
    pub lambdas: Vec<f64>,
    pub values: Vec<C64>,
}

impl CharacteristicSamples {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

pub fn sample_characteristic(
    inst: &ProtocolInstance,
    det: &DetectorModel,
    lambdas: &[f64],
) -> Result<CharacteristicSamples> {
    if lambdas.is_empty() {
        return Err(Error::NonemptyGridRequired);
    }
    let values = lambdas.iter().map(|&l| run_protocol(inst, det, l)).collect::<Result<Vec<_>>>()?;
    Ok(CharacteristicSamples { lambdas: lambdas.to_vec(), values })
}

/// `Σ P(k,j,m,i,l) e^{iλΔ}` straight from the amplitude table.
pub fn characteristic_from_amplitudes(amps: &AmplitudeSet, lambda: f64) -> C64 {
    csum(amps.iter().map(|a| a.value * C64::from_polar(1.0, lambda * a.delta)))
}

/// Uniform grid `offset + n · spacing`, `0 ≤ n < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub offset: f64,
    pub spacing: f64,
    pub count: usize,
}

impl Lattice {
    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|n| self.offset + n as f64 * self.spacing).collect()
    }

    /// Coupling period `2π / spacing` over which the lattice is resolved.
    pub fn period(&self) -> f64 {
        TAU / self.spacing
    }

    /// `samples` equally spaced couplings covering one period from 0.
    pub fn sampling_grid(&self, samples: usize) -> Vec<f64> {
        let h = self.period() / samples as f64;
        (0..samples).map(|n| n as f64 * h).collect()
    }
}

/// Every Δ value reachable from the spectrum, sorted, merged within 1e−9.
pub fn achievable_deltas(obs: &Observable) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for &a in obs.eigenvalues() {
        if values.iter().all(|v| (v - a).abs() > LATTICE_TOL) {
            values.push(a);
        }
    }
    let n = values.len();
    let mut deltas: Vec<f64> = (0..n.pow(5))
        .map(|mut t| {
            let mut idx = [0usize; 5];
            for slot in idx.iter_mut() {
                *slot = t % n;
                t /= n;
            }
            crate::protocol::delta_of(&values, idx)
        })
        .collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup_by(|x, y| (*x - *y).abs() <= LATTICE_TOL);
    deltas
}

/// Smallest uniform lattice containing every achievable Δ, or `None` when
/// the Δ differences are incommensurate.
pub fn detect_lattice(obs: &Observable) -> Option<Lattice> {
    let deltas = achievable_deltas(obs);
    let lo = deltas[0];
    if deltas.len() == 1 {
        return Some(Lattice { offset: lo, spacing: 1.0, count: 1 });
    }
    let diffs: Vec<f64> = deltas.iter().map(|d| d - lo).collect();
    let min_gap = deltas.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let range = diffs[diffs.len() - 1];
    (1..=MAX_SUBDIVISION).find_map(|n| {
        let spacing = min_gap / n as f64;
        let fits = diffs.iter().all(|&d| {
            let steps = (d / spacing).round();
            (d - steps * spacing).abs() <= LATTICE_TOL * d.abs().max(spacing)
        });
        let count = (range / spacing).round() as usize + 1;
        (fits && count <= MAX_LATTICE_POINTS).then_some(Lattice { offset: lo, spacing, count })
    })
}

/// Discrete Fourier inversion of uniformly sampled `G_λ` onto `lattice`.
///
/// The samples must be `L ≥ count` equally spaced couplings spanning exactly
/// one period `2π / spacing`. The recovered real weights are checked by
/// re-synthesizing `G_λ` at every sample.
pub fn invert_to_qpd(samples: &CharacteristicSamples, lattice: Lattice) -> Result<QuasiDistribution> {
    let l = samples.len();
    if l == 0 {
        return Err(Error::NonemptyGridRequired);
    }
    if !(lattice.spacing > 0.0) || lattice.count == 0 {
        return Err(Error::LatticeMismatch(format!("degenerate lattice {lattice:?}")));
    }
    if l < lattice.count {
        return Err(Error::LatticeMismatch(format!("{l} samples cannot resolve {} lattice points", lattice.count)));
    }
    let lambda0 = samples.lambdas[0];
    let step = lattice.period() / l as f64;
    for (n, &lam) in samples.lambdas.iter().enumerate() {
        let expected = lambda0 + n as f64 * step;
        if (lam - expected).abs() > GRID_TOL * (1.0 + expected.abs()) {
            return Err(Error::LatticeMismatch(format!(
                "sample {n} at λ = {lam} is off the grid of period 2π/{} (expected {expected})",
                lattice.spacing
            )));
        }
    }

    let points = lattice.points();
    let scale = 1.0 / l as f64;
    let raw: Vec<C64> = points
        .iter()
        .map(|&delta| {
            let mut s = ComplexSum::default();
            for (&lam, &g) in samples.lambdas.iter().zip(&samples.values) {
                s.add(g * C64::from_polar(1.0, -lam * delta));
            }
            s.value() * scale
        })
        .collect();

    let imag_residue = raw.iter().map(|w| w.im.abs()).fold(0.0, f64::max);
    let bins: Vec<QpdBin> = points.iter().zip(&raw).map(|(&delta, w)| QpdBin { delta, weight: w.re }).collect();
    let qpd = QuasiDistribution::new(bins, None, imag_residue);

    let residual = samples
        .lambdas
        .iter()
        .zip(&samples.values)
        .map(|(&lam, &g)| (g - qpd.characteristic(lam)).norm())
        .fold(0.0, f64::max);
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::LatticeMismatch(format!(
            "re-synthesized G_λ deviates by {residual:.3e} (limit {RECONSTRUCTION_TOL:.0e})"
        )));
    }
    Ok(qpd)
}
