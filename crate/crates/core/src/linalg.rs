//! Finite-dimensional complex linear algebra: observables and their spectral
//! projectors, density operators, unitary segments and time schedules.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{DENSITY_EIGEN_FLOOR, HERMITIAN_TOL, VALIDATION_TOL};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues closer than this are treated as a degenerate run when sorting.
const TIE_TOL: f64 = 1e-12;

/// Components below this magnitude are skipped when fixing eigenvector phases.
const PHASE_FLOOR: f64 = 1e-10;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// Kronecker product `a ⊗ b`, with the index of `b` running fastest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)])
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

fn check_hermitian(m: &CMatrix, tolerance: f64) -> Result<usize> {
    let dim = check_square(m)?;
    let deviation = hermiticity_deviation(m);
    if deviation > tolerance {
        return Err(Error::NonHermitianInput { deviation, tolerance });
    }
    Ok(dim)
}

/// A Hermitian observable together with its spectral decomposition into
/// rank-1 projectors.
///
/// Eigenvalues are sorted ascending. Every eigenvector has its first
/// non-negligible component made real and positive, and degenerate runs are
/// ordered lexicographically by the phase-fixed components (descending), so
/// the decomposition of a given matrix is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    projectors: Vec<CMatrix>,
}

impl Observable {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as the columns of a unitary matrix.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, r: usize) -> &CMatrix {
        &self.projectors[r]
    }

    /// Matrix elements of `m` in the eigenbasis, `V† m V`.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `Σ_r a_r Π_r`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (a, p)| acc + p * c64(*a, 0.0))
    }

    /// Same eigenvectors with a replaced spectrum; the stored matrix is
    /// rebuilt from the new spectrum.
    pub(crate) fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Self {
        let mut out = Self { eigenvalues, ..self.clone() };
        out.matrix = out.reconstruct();
        out
    }
}

/// Spectral decomposition of a Hermitian matrix.
pub fn eigendecompose_hermitian(a: &CMatrix) -> Result<Observable> {
    eigendecompose_hermitian_with(a, HERMITIAN_TOL)
}

pub fn eigendecompose_hermitian_with(a: &CMatrix, tolerance: f64) -> Result<Observable> {
    let dim = check_hermitian(a, tolerance)?;
    // Exact Hermitian part so the solver sees a symmetric input.
    let sym = (a + a.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);

    let mut pairs: Vec<(f64, CVector)> = (0..dim)
        .map(|r| {
            let mut v: CVector = eig.eigenvectors.column(r).into_owned();
            let norm = v.norm();
            v /= c64(norm, 0.0);
            if let Some(c) = v.iter().copied().find(|c| c.norm() > PHASE_FLOOR) {
                let phase = c.conj() / c.norm();
                v *= phase;
            }
            (eig.eigenvalues[r], v)
        })
        .collect();

    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (pairs[end].0 - pairs[start].0).abs() <= TIE_TOL {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lexicographic_desc(&x.1, &y.1));
        start = end;
    }

    let eigenvalues: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
    let columns: Vec<CVector> = pairs.into_iter().map(|(_, v)| v).collect();
    let eigenvectors = CMatrix::from_columns(&columns);
    let projectors = columns.iter().map(|v| v * v.adjoint()).collect();

    Ok(Observable { matrix: a.clone(), eigenvalues, eigenvectors, projectors })
}

fn lexicographic_desc(x: &CVector, y: &CVector) -> Ordering {
    for (a, b) in x.iter().zip(y.iter()) {
        let ord = b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im));
        if (a - b).norm() > PHASE_FLOOR && ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// A normalized, positive semidefinite density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_hermitian(&matrix, HERMITIAN_TOL)?;
        let trace = matrix.trace();
        if (trace - c64(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let sym = (&matrix + matrix.adjoint()) * c64(0.5, 0.0);
        let lowest = SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lowest < DENSITY_EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_pure(&self, tolerance: f64) -> bool {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix)) <= tolerance
    }
}

/// `|ψ⟩⟨ψ|` for the normalized input vector.
pub fn pure_state(amplitudes: &[C64]) -> Result<DensityOperator> {
    let v = CVector::from_column_slice(amplitudes);
    let norm = v.norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite);
    }
    if norm == 0.0 || amplitudes.is_empty() {
        return Err(Error::ZeroVector);
    }
    let v = v / c64(norm, 0.0);
    DensityOperator::new(&v * v.adjoint())
}

/// Which evolution interval a segment covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interval {
    /// t0 → t1
    First,
    /// t1 → t2
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySegment {
    matrix: CMatrix,
    label: Option<Interval>,
}

impl UnitarySegment {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let deviation = unitarity_deviation(&matrix);
        if deviation > VALIDATION_TOL {
            return Err(Error::NonUnitary { deviation, tolerance: VALIDATION_TOL });
        }
        Ok(Self { matrix, label: None })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim), label: None }
    }

    pub fn with_label(mut self, label: Interval) -> Self {
        self.label = Some(label);
        self
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> Option<Interval> {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Product `self · then`, i.e. `then` applied first.
    pub fn after(&self, then: &UnitarySegment) -> UnitarySegment {
        UnitarySegment { matrix: &self.matrix * &then.matrix, label: None }
    }
}

/// `exp(−i H dt)` via the spectral decomposition of `H`.
pub fn evolve(h: &CMatrix, dt: f64) -> Result<UnitarySegment> {
    if !dt.is_finite() {
        return Err(Error::NonFinite);
    }
    let spectrum = eigendecompose_hermitian(h)?;
    let v = spectrum.eigenvectors();
    let phases = CVector::from_iterator(
        spectrum.dim(),
        spectrum.eigenvalues().iter().map(|e| C64::from_polar(1.0, -e * dt)),
    );
    let matrix = v * CMatrix::from_diagonal(&phases) * v.adjoint();
    UnitarySegment::new(matrix)
}

/// How the two evolution segments of a schedule are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// Time-independent Hermitian generator (angular-frequency units).
    Generator(CMatrix),
    Segments(UnitarySegment, UnitarySegment),
}

/// Measurement times `t0 ≤ t1 ≤ t2` and the dynamics between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub dynamics: Dynamics,
}

impl Schedule {
    pub fn new(t0: f64, t1: f64, t2: f64, dynamics: Dynamics) -> Result<Self> {
        if ![t0, t1, t2].iter().all(|t| t.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(t0 <= t1 && t1 <= t2) {
            return Err(unordered_times(t0, t1, t2));
        }
        Ok(Self { t0, t1, t2, dynamics })
    }

    /// The segments `(U1, U2)` for the intervals t0→t1 and t1→t2.
    pub fn segments(&self) -> Result<(UnitarySegment, UnitarySegment)> {
        match &self.dynamics {
            Dynamics::Generator(h) => Ok((
                evolve(h, self.t1 - self.t0)?.with_label(Interval::First),
                evolve(h, self.t2 - self.t1)?.with_label(Interval::Second),
            )),
            Dynamics::Segments(u1, u2) => {
                Ok((u1.clone().with_label(Interval::First), u2.clone().with_label(Interval::Second)))
            }
        }
    }
}

fn unordered_times(t0: f64, t1: f64, t2: f64) -> Error {
    Error::InvalidSchedule(format!("times must satisfy t0 ≤ t1 ≤ t2, got ({t0}, {t1}, {t2})"))
}
