//! Leggett-Garg analysis for binary observables: two-time correlators from
//! the operator formula and from path amplitudes, the parameter
//! `K = C01 + C12 − C02`, its classical/quantum decomposition and the
//! two-level sign identities behind it.
//!
//! Binary means a two-level observable with spectrum exactly {−1, +1}; eigen
//! index 0 carries −1, index 1 carries +1, and the "bar" of an index is the
//! other one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, Observable, C64};
use crate::protocol::{enumerate_amplitudes, AmplitudeSet, PathIndex, ProtocolInstance};
use crate::qpd::{build_qpd, TimePair};
use crate::sum::{csum, ComplexSum};
use crate::tolerance::{Tolerances, BINARY_TOL};

const fn bar(r: usize) -> usize {
    1 - r
}

fn check_binary_spectrum(eigenvalues: &[f64]) -> Result<()> {
    if eigenvalues.len() != 2 {
        return Err(Error::NotBinary(format!("dimension {} (binary observables are two-level)", eigenvalues.len())));
    }
    if (eigenvalues[0] + 1.0).abs() > BINARY_TOL || (eigenvalues[1] - 1.0).abs() > BINARY_TOL {
        return Err(Error::NotBinary(format!("spectrum {eigenvalues:?} is not {{−1, +1}}")));
    }
    Ok(())
}

/// Accepts a two-level observable with spectrum {−1, +1} (within 1e−9) and
/// returns it with the eigenvalues snapped to exactly ±1.
pub fn assert_binary(obs: &Observable) -> Result<Observable> {
    check_binary_spectrum(obs.eigenvalues())?;
    Ok(obs.with_eigenvalues(vec![-1.0, 1.0]))
}

/// Instance with its observable passed through [`assert_binary`].
pub fn binary_instance(inst: &ProtocolInstance) -> Result<ProtocolInstance> {
    Ok(inst.with_observable(assert_binary(inst.observable())?))
}

fn binary_amplitudes(amps: &AmplitudeSet) -> Result<AmplitudeSet> {
    check_binary_spectrum(amps.eigenvalues())?;
    Ok(amps.with_eigenvalues(vec![-1.0, 1.0]))
}

/// Symmetrized correlator `Re Tr[(A(t_a)A(t_b) + A(t_b)A(t_a)) ρ0] / 2` with
/// Heisenberg-picture observables.
pub fn correlator_operator(inst: &ProtocolInstance, pair: TimePair) -> Result<f64> {
    let obs = assert_binary(inst.observable())?;
    let a = obs.matrix();
    let heisenberg = |u: &CMatrix| u.adjoint() * a * u;
    let n = inst.dim();
    let at = [CMatrix::identity(n, n), inst.u1().matrix().clone(), inst.total_unitary()].map(|u| heisenberg(&u));
    let (x, y) = match pair {
        TimePair::T01 => (0, 1),
        TimePair::T12 => (1, 2),
        TimePair::T02 => (0, 2),
    };
    let anti = &at[x] * &at[y] + &at[y] * &at[x];
    Ok((anti * inst.rho0().matrix()).trace().re / 2.0)
}

/// Ket and bra slots of each measurement time inside `(k, j, m, i, l)`.
fn time_slots(time: usize) -> &'static [usize] {
    match time {
        0 => &[3, 4],
        1 => &[1, 2],
        _ => &[0],
    }
}

fn pair_times(pair: TimePair) -> (usize, usize) {
    match pair {
        TimePair::T01 => (0, 1),
        TimePair::T12 => (1, 2),
        TimePair::T02 => (0, 2),
    }
}

/// Two-time quasi-probability averaged over every placement of the two
/// outcomes in their ket/bra slots (four placements for t0-t1, two for the
/// pairs involving t2). Row = earlier outcome.
pub fn symmetrized_two_time(amps: &AmplitudeSet, pair: TimePair) -> DMatrix<C64> {
    let d = amps.dim();
    let (early, late) = pair_times(pair);
    let (es, ls) = (time_slots(early), time_slots(late));
    let mut sums = vec![ComplexSum::default(); d * d];
    for a in amps.iter() {
        for &e in es {
            for &l in ls {
                sums[a.indices[e] * d + a.indices[l]].add(a.value);
            }
        }
    }
    let scale = c64(1.0 / (es.len() * ls.len()) as f64, 0.0);
    DMatrix::from_fn(d, d, |r, c| sums[r * d + c].value() * scale)
}

/// `C_ab = Σ a_x a_y P(x, y)` from the symmetrized two-time table.
pub fn correlator_from_nd(amps: &AmplitudeSet, pair: TimePair) -> Result<f64> {
    let amps = binary_amplitudes(amps)?;
    let table = symmetrized_two_time(&amps, pair);
    let a = amps.eigenvalues();
    let c = csum((0..2).flat_map(|x| (0..2).map(move |y| (x, y))).map(|(x, y)| table[(x, y)] * (a[x] * a[y])));
    Ok(c.re)
}

/// Weight of one path amplitude in `K`:
/// `[(a_i + a_l)(a_j + a_m) + 2 a_k (a_j + a_m − a_i − a_l)] / 4`.
pub fn k_weight(a: &[f64], [k, j, m, i, l]: PathIndex) -> f64 {
    let (early, mid) = (a[i] + a[l], a[j] + a[m]);
    (early * mid + 2.0 * a[k] * (mid - early)) / 4.0
}

/// The four amplitude classes of the `K` decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KClass {
    /// `m = j, l = i`
    Classical,
    /// `m = j, l ≠ i`
    CoherentInitial,
    /// `m ≠ j, l = i`
    CoherentIntermediate,
    /// `m ≠ j, l ≠ i`
    DoublyCoherent,
}

impl KClass {
    pub fn of([_, j, m, i, l]: PathIndex) -> Self {
        match (m == j, l == i) {
            (true, true) => KClass::Classical,
            (true, false) => KClass::CoherentInitial,
            (false, true) => KClass::CoherentIntermediate,
            (false, false) => KClass::DoublyCoherent,
        }
    }
}

fn k_class_sum(amps: &AmplitudeSet, class: KClass) -> C64 {
    let a = amps.eigenvalues();
    csum(amps.iter().filter(|p| KClass::of(p.indices) == class).map(|p| p.value * k_weight(a, p.indices)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgBreakdown {
    pub c01: f64,
    pub c12: f64,
    pub c02: f64,
    pub k: f64,
    pub k_cl: f64,
    pub k_q1: f64,
    pub k_q2: f64,
    pub negativity: f64,
    /// `K > 1 + tol` or `K < −3 − tol`.
    pub lgi_violated: bool,
    /// Negativity of the quasi-probability distribution above tolerance.
    pub mrps_violated: bool,
}

pub fn lg_breakdown(inst: &ProtocolInstance) -> Result<LgBreakdown> {
    lg_breakdown_with(&enumerate_amplitudes(inst)?, &Tolerances::default())
}

/// Breakdown from an already enumerated binary amplitude set.
pub fn lg_breakdown_with(amps: &AmplitudeSet, tol: &Tolerances) -> Result<LgBreakdown> {
    let amps = binary_amplitudes(amps)?;
    let a = amps.eigenvalues();

    // Doubly coherent paths are summed like the rest; their weight must vanish.
    if let Some(p) = amps.iter().find(|p| KClass::of(p.indices) == KClass::DoublyCoherent && k_weight(a, p.indices) != 0.0) {
        return Err(Error::IdentityViolation {
            label: "doubly-coherent f-weight".into(),
            residual: k_weight(a, p.indices).abs(),
        });
    }

    let k = csum(amps.iter().map(|p| p.value * k_weight(a, p.indices))).re;
    let k_cl = k_class_sum(&amps, KClass::Classical).re;
    let k_q1 = k_class_sum(&amps, KClass::CoherentInitial).re;
    let k_q2 = k_class_sum(&amps, KClass::CoherentIntermediate).re;

    let c01 = correlator_from_nd(&amps, TimePair::T01)?;
    let c12 = correlator_from_nd(&amps, TimePair::T12)?;
    let c02 = correlator_from_nd(&amps, TimePair::T02)?;

    let negativity = build_qpd(&amps, tol.grouping)?.negativity();
    Ok(LgBreakdown {
        c01,
        c12,
        c02,
        k,
        k_cl,
        k_q1,
        k_q2,
        negativity,
        lgi_violated: k > 1.0 + tol.lgi || k < -3.0 - tol.lgi,
        mrps_violated: negativity > tol.negativity,
    })
}

/// Compact classical form `1 − 4 Σ_k P(k, k̄, k̄, k, k)`.
pub fn classical_k_form(amps: &AmplitudeSet) -> Result<f64> {
    let amps = binary_amplitudes(amps)?;
    let flip_flop = csum((0..2).map(|k| amps.value([k, bar(k), bar(k), k, k])));
    Ok(1.0 - 4.0 * flip_flop.re)
}

/// Classical joint probability of eigen indices `i → j → k` at t0, t1, t2.
pub fn classical_path_probability(amps: &AmplitudeSet, i: usize, j: usize, k: usize) -> f64 {
    amps.value([k, j, j, i, i]).re
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub label: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

pub const ID_FLIP_FINAL: &str = "(a) P(k,k,k,i,ī) = −P(k̄,k̄,k̄,i,ī)";
pub const ID_FLIP_MIDDLE: &str = "(b) P(k,k̄,k̄,i,ī) = −P(k̄,k,k,i,ī)";
pub const ID_FINAL_SUM: &str = "(c) Σ_k P(k,j,j̄,i,i) = 0";
pub const ID_KQ1_ZERO: &str = "(d) K_q1 = 0";
pub const ID_KQ2_COMPACT: &str = "(e) K_q2 = −4 Σ_k Re P(k,j,j̄,k,k)";

pub fn verify_appendix_b(inst: &ProtocolInstance) -> Result<IdentityReport> {
    verify_identities(&enumerate_amplitudes(inst)?, Tolerances::default().validation)
}

/// Checks the two-level sign identities and the two compact `K` forms on an
/// amplitude table. Fails with the worst violated identity.
pub fn verify_identities(amps: &AmplitudeSet, tol: f64) -> Result<IdentityReport> {
    let amps = binary_amplitudes(amps)?;
    let p = |idx: PathIndex| amps.value(idx);
    let a = amps.eigenvalues();
    let pairs = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];

    let flip_final = pairs
        .iter()
        .map(|&(k, i)| (p([k, k, k, i, bar(i)]) + p([bar(k), bar(k), bar(k), i, bar(i)])).norm())
        .fold(0.0, f64::max);
    let flip_middle = pairs
        .iter()
        .map(|&(k, i)| (p([k, bar(k), bar(k), i, bar(i)]) + p([bar(k), k, k, i, bar(i)])).norm())
        .fold(0.0, f64::max);
    let final_sum = pairs
        .iter()
        .map(|&(j, i)| csum((0..2).map(|k| p([k, j, bar(j), i, i]))).norm())
        .fold(0.0, f64::max);

    let k_q1 = csum(
        (0..2)
            .flat_map(|i| pairs.iter().map(move |&(j, k)| (i, j, k)))
            .map(|(i, j, k)| p([k, j, j, i, bar(i)]) * (a[k] * a[j])),
    );
    let k_q2 = k_class_sum(&amps, KClass::CoherentIntermediate).re;
    let kq2_compact = (0..2)
        .map(|j| {
            let compact = -4.0 * csum((0..2).map(|k| p([k, j, bar(j), k, k]))).re;
            (compact - k_q2).abs()
        })
        .fold(0.0, f64::max);

    let checks = vec![
        IdentityCheck { label: ID_FLIP_FINAL, residual: flip_final },
        IdentityCheck { label: ID_FLIP_MIDDLE, residual: flip_middle },
        IdentityCheck { label: ID_FINAL_SUM, residual: final_sum },
        IdentityCheck { label: ID_KQ1_ZERO, residual: k_q1.norm() },
        IdentityCheck { label: ID_KQ2_COMPACT, residual: kq2_compact },
    ];
    let worst = checks
        .iter()
        .filter(|c| !(c.residual <= tol))
        .max_by(|x, y| x.residual.total_cmp(&y.residual));
    if let Some(c) = worst {
        return Err(Error::IdentityViolation { label: c.label.to_string(), residual: c.residual });
    }
    Ok(IdentityReport { checks })
}
