//! Numerical tolerances shared by the validation and classification code.
//!
//! Defaults are sized for double-precision accumulation over at most d⁵
//! terms with d ≤ 8.

/// Symmetry tolerance for Hermiticity checks and the density-operator trace.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Generic validation tolerance (unitarity, completeness, sum rules).
pub const VALIDATION_TOL: f64 = 1e-10;

/// Lowest eigenvalue accepted for a density operator.
pub const DENSITY_EIGEN_FLOOR: f64 = -1e-10;

/// Absolute tolerance for merging Δ values into one support point.
pub const GROUPING_TOL: f64 = 1e-9;

/// Imaginary residue above which weight realization is refused.
pub const RESIDUE_LIMIT: f64 = 1e-8;

/// Margin beyond the Leggett-Garg bounds before a violation is flagged.
pub const LGI_TOL: f64 = 1e-9;

/// Negativity above which macrorealism per se is reported violated.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Spectrum snapping tolerance for binary observables.
pub const BINARY_TOL: f64 = 1e-9;

/// Default cap on the number of enumerated path amplitudes.
pub const DEFAULT_AMPLITUDE_CAP: usize = 1_000_000;

/// Bundle of the tolerances above, overridable per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub validation: f64,
    pub grouping: f64,
    pub residue: f64,
    pub lgi: f64,
    pub negativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            validation: VALIDATION_TOL,
            grouping: GROUPING_TOL,
            residue: RESIDUE_LIMIT,
            lgi: LGI_TOL,
            negativity: NEGATIVITY_TOL,
        }
    }
}
