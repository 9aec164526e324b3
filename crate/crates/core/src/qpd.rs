//! Quasi-probability distribution over Δ, its classical/quantum split,
//! single-time marginals and two-time Kirkwood-Dirac reductions.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::protocol::{AmplitudeSet, PathIndex, PathKind};
use crate::sum::{csum, rsum, ComplexSum};
use crate::tolerance::RESIDUE_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpdBin {
    pub delta: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitWeights {
    pub classical: f64,
    pub quantum: f64,
}

/// Real weights on a discrete Δ support.
///
/// Built from path amplitudes, every bin also carries its classical and
/// quantum contributions. Distributions recovered from a characteristic
/// function carry no split.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    bins: Vec<QpdBin>,
    split: Option<Vec<SplitWeights>>,
    negativity: f64,
    imag_residue: f64,
}

impl QuasiDistribution {
    pub(crate) fn new(bins: Vec<QpdBin>, split: Option<Vec<SplitWeights>>, imag_residue: f64) -> Self {
        let negativity = rsum(bins.iter().map(|b| (-b.weight).max(0.0)));
        Self { bins, split, negativity, imag_residue }
    }

    pub fn support(&self) -> &[QpdBin] {
        &self.bins
    }

    pub fn split(&self) -> Option<&[SplitWeights]> {
        self.split.as_deref()
    }

    /// `P_cl(Δ)` on the same support points.
    pub fn classical_part(&self) -> Option<Vec<QpdBin>> {
        self.part(|s| s.classical)
    }

    /// `P_q(Δ)` on the same support points.
    pub fn quantum_part(&self) -> Option<Vec<QpdBin>> {
        self.part(|s| s.quantum)
    }

    fn part(&self, pick: impl Fn(&SplitWeights) -> f64) -> Option<Vec<QpdBin>> {
        let split = self.split.as_ref()?;
        Some(self.bins.iter().zip(split).map(|(b, s)| QpdBin { delta: b.delta, weight: pick(s) }).collect())
    }

    pub fn negativity(&self) -> f64 {
        self.negativity
    }

    /// Largest imaginary part discarded when the weights were realized.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn total_weight(&self) -> f64 {
        rsum(self.bins.iter().map(|b| b.weight))
    }

    /// Weight of the support point within `tol` of `delta`, or 0.
    pub fn weight_at(&self, delta: f64, tol: f64) -> f64 {
        self.bins.iter().find(|b| (b.delta - delta).abs() <= tol).map_or(0.0, |b| b.weight)
    }

    /// `Σ_Δ P(Δ) e^{iλΔ}`.
    pub fn characteristic(&self, lambda: f64) -> C64 {
        csum(self.bins.iter().map(|b| C64::from_polar(b.weight, lambda * b.delta)))
    }
}

/// Groups amplitudes by Δ (consecutive sorted values closer than
/// `grouping_tol` share a point, labelled by the smallest), sums each group
/// with compensation and keeps the real part.
pub fn build_qpd(amplitudes: &AmplitudeSet, grouping_tol: f64) -> Result<QuasiDistribution> {
    let mut order: Vec<usize> = (0..amplitudes.len()).collect();
    let amps = amplitudes.as_slice();
    order.sort_by(|&x, &y| amps[x].delta.total_cmp(&amps[y].delta));

    let mut bins = Vec::new();
    let mut split = Vec::new();
    let mut residue: f64 = 0.0;

    let mut start = 0;
    while start < order.len() {
        let delta = amps[order[start]].delta;
        let mut prev = delta;
        let mut end = start;
        let (mut total, mut classical, mut quantum) =
            (ComplexSum::default(), ComplexSum::default(), ComplexSum::default());
        while end < order.len() && amps[order[end]].delta - prev <= grouping_tol {
            let a = &amps[order[end]];
            total.add(a.value);
            match a.kind {
                PathKind::Classical => classical.add(a.value),
                PathKind::Quantum => quantum.add(a.value),
            }
            prev = a.delta;
            end += 1;
        }
        let (t, c, q) = (total.value(), classical.value(), quantum.value());
        residue = residue.max(t.im.abs()).max(c.im.abs()).max(q.im.abs());
        bins.push(QpdBin { delta, weight: t.re });
        split.push(SplitWeights { classical: c.re, quantum: q.re });
        start = end;
    }

    if residue > RESIDUE_LIMIT {
        return Err(Error::ResidueTooLarge { residue, tolerance: RESIDUE_LIMIT });
    }
    Ok(QuasiDistribution::new(bins, Some(split), residue))
}

/// `Σ_Δ max(0, −P(Δ))`.
pub fn negativity(qpd: &QuasiDistribution) -> f64 {
    qpd.negativity()
}

/// The two partial sums of the quantum part: over `m ≠ j`, and over
/// `m = j, l ≠ i`. Both vanish for any valid instance.
pub fn quantum_partial_sums(amplitudes: &AmplitudeSet) -> (C64, C64) {
    let coherent_t1 = amplitudes.sum_where(|[_, j, m, _, _]| m != j);
    let coherent_t0 = amplitudes.sum_where(|[_, j, m, i, l]| m == j && l != i);
    (coherent_t1, coherent_t0)
}

fn marginal(amplitudes: &AmplitudeSet, slots: &[usize]) -> Vec<(f64, f64)> {
    let d = amplitudes.dim();
    let mut sums = vec![ComplexSum::default(); d];
    for a in amplitudes.iter() {
        for &slot in slots {
            sums[a.indices[slot]].add(a.value);
        }
    }
    let scale = 1.0 / slots.len() as f64;
    amplitudes.eigenvalues().iter().zip(sums).map(|(&e, s)| (e, s.value().re * scale)).collect()
}

/// `P(a_k)`: sum over every index but the final one.
pub fn marginal_final(amplitudes: &AmplitudeSet) -> Vec<(f64, f64)> {
    marginal(amplitudes, &[0])
}

/// `P(a_i)`, averaged over the two t0 slots `i` and `l`.
pub fn marginal_initial(amplitudes: &AmplitudeSet) -> Vec<(f64, f64)> {
    marginal(amplitudes, &[3, 4])
}

/// `P(a_j)`, averaged over the two t1 slots `j` and `m`.
pub fn marginal_intermediate(amplitudes: &AmplitudeSet) -> Vec<(f64, f64)> {
    marginal(amplitudes, &[1, 2])
}

/// Pair of measurement times, earlier first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimePair {
    T01,
    T12,
    T02,
}

impl TimePair {
    pub const ALL: [TimePair; 3] = [TimePair::T01, TimePair::T12, TimePair::T02];

    /// Ket-side slots `(earlier, later)` within `(k, j, m, i, l)`.
    pub(crate) fn slots(self) -> (usize, usize) {
        match self {
            TimePair::T01 => (3, 1),
            TimePair::T12 => (1, 0),
            TimePair::T02 => (3, 0),
        }
    }
}

/// Two-time quasi-probabilities: row = outcome at the earlier time, column =
/// outcome at the later time.
#[derive(Debug, Clone, PartialEq)]
pub struct KirkwoodDiracTable {
    pub pair: TimePair,
    pub raw: CMatrix,
}

impl KirkwoodDiracTable {
    pub fn real(&self) -> nalgebra::DMatrix<f64> {
        self.raw.map(|z| z.re)
    }

    pub fn total(&self) -> C64 {
        csum(self.raw.iter().copied())
    }

    /// Row sums: distribution of the earlier outcome.
    pub fn earlier_marginal(&self) -> Vec<C64> {
        (0..self.raw.nrows()).map(|r| csum(self.raw.row(r).iter().copied())).collect()
    }

    /// Column sums: distribution of the later outcome.
    pub fn later_marginal(&self) -> Vec<C64> {
        (0..self.raw.ncols()).map(|c| csum(self.raw.column(c).iter().copied())).collect()
    }
}

/// Sum of the amplitudes over the three indices not named by `pair`
/// (the bra-side slots at t0 and t1 included).
pub fn kirkwood_dirac(amplitudes: &AmplitudeSet, pair: TimePair) -> KirkwoodDiracTable {
    let d = amplitudes.dim();
    let (early, late) = pair.slots();
    let mut sums = vec![ComplexSum::default(); d * d];
    for a in amplitudes.iter() {
        sums[a.indices[early] * d + a.indices[late]].add(a.value);
    }
    let raw = CMatrix::from_fn(d, d, |r, c| sums[r * d + c].value());
    KirkwoodDiracTable { pair, raw }
}

/// Indices of the amplitude related by the conjugate-pair symmetry,
/// `(k, j, m, i, l) → (k, m, j, l, i)`.
pub fn conjugate_partner([k, j, m, i, l]: PathIndex) -> PathIndex {
    [k, m, j, l, i]
}
